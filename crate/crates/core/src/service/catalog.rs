use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Service, ServiceError};
use crate::rdf::{NamedNode, Term};

pub const PER_PAGE_OPTIONS: [u32; 3] = [20, 50, 100];
pub const PER_PAGE_DEFAULT: u32 = 50;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Category {
    pub class: NamedNode,
    pub display_name: String,
    pub count: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SortDir {
    #[default]
    Asc,
    Desc,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CatalogPage {
    pub category: NamedNode,
    pub total: u64,
    pub page: u32,
    pub per_page: u32,
    pub sort_by: Option<NamedNode>,
    pub sort_dir: SortDir,
    pub items: Vec<(NamedNode, String)>,
}

impl Service {
    fn class_counts(&self) -> Result<BTreeMap<NamedNode, u64>, ServiceError> {
        let q = "SELECT ?c (COUNT(DISTINCT ?s) AS ?n) WHERE { { ?s a ?c } UNION { GRAPH ?g { ?s a ?c } } } GROUP BY ?c";
        let result = self.data.select(q)?;
        let mut out = BTreeMap::new();
        for row in &result.rows {
            let (Some(Term::NamedNode(c)), Some(n)) = (row.get("c"), row.get("n")) else { continue };
            out.insert(c.clone(), n.value().parse().unwrap_or(0));
        }
        Ok(out)
    }

    /// Displayed classes present in the data with their instance counts,
    /// sorted by display name.
    pub fn list_categories(&self) -> Result<Vec<Category>, ServiceError> {
        let mut out: Vec<Category> = self
            .class_counts()?
            .into_iter()
            .filter(|(c, _)| self.config.display.is_displayed(c))
            .map(|(class, count)| Category {
                display_name: self.config.display.class_name(&class),
                class,
                count,
            })
            .collect();
        out.sort_by(|a, b| a.display_name.cmp(&b.display_name).then_with(|| a.class.cmp(&b.class)));
        Ok(out)
    }

    /// One page of a category, ordered by the sort key (case-insensitive,
    /// entities without a value last) then by IRI.
    pub fn get_page(
        &self,
        category: &NamedNode,
        page: u32,
        per_page: u32,
        sort_by: Option<&NamedNode>,
        sort_dir: SortDir,
    ) -> Result<CatalogPage, ServiceError> {
        if !PER_PAGE_OPTIONS.contains(&per_page) {
            return Err(ServiceError::InvalidPerPage(per_page));
        }
        if page == 0 {
            return Err(ServiceError::InvalidPage);
        }
        let rule = self.config.display.for_class(category);
        if !self.config.display.is_displayed(category) {
            return Err(ServiceError::UnknownCategory(category.clone()));
        }
        if let Some(key) = sort_by {
            if !rule.is_some_and(|r| r.sort_keys.contains(key)) {
                return Err(ServiceError::InvalidSort(key.clone()));
            }
        }
        let members = format!("{{ ?s a {category} }} UNION {{ GRAPH ?g {{ ?s a {category} }} }}");
        let mut keyed: BTreeMap<NamedNode, Option<String>> = BTreeMap::new();
        match sort_by {
            None => {
                let q = format!("SELECT DISTINCT ?s WHERE {{ {members} }}");
                for s in self.data.select(&q)?.column("s").filter_map(Term::as_named_node) {
                    keyed.insert(s.clone(), None);
                }
            }
            Some(key) => {
                let q = format!(
                    "SELECT ?s ?v WHERE {{ {{ {members} }} OPTIONAL {{ {{ ?s {key} ?v }} UNION {{ GRAPH ?h {{ ?s {key} ?v }} }} }} }}"
                );
                for row in &self.data.select(&q)?.rows {
                    let Some(Term::NamedNode(s)) = row.get("s") else { continue };
                    let v = row.get("v").map(|v| v.value().to_lowercase());
                    let slot = keyed.entry(s.clone()).or_insert(None);
                    if let Some(v) = v {
                        if slot.as_ref().is_none_or(|cur| v < *cur) {
                            *slot = Some(v);
                        }
                    }
                }
            }
        }
        if keyed.is_empty() && rule.is_none() {
            return Err(ServiceError::UnknownCategory(category.clone()));
        }
        let total = keyed.len() as u64;
        let mut ordered: Vec<(NamedNode, Option<String>)> = keyed.into_iter().collect();
        if sort_by.is_some() {
            ordered.sort_by(|(ia, a), (ib, b)| {
                let by_key = match (a, b) {
                    (Some(a), Some(b)) if sort_dir == SortDir::Desc => b.cmp(a),
                    (Some(a), Some(b)) => a.cmp(b),
                    (Some(_), None) => std::cmp::Ordering::Less,
                    (None, Some(_)) => std::cmp::Ordering::Greater,
                    (None, None) => std::cmp::Ordering::Equal,
                };
                by_key.then_with(|| ia.cmp(ib))
            });
        } else if sort_dir == SortDir::Desc {
            ordered.reverse();
        }
        let start = (page as usize - 1).saturating_mul(per_page as usize);
        let items = ordered
            .into_iter()
            .skip(start)
            .take(per_page as usize)
            .map(|(e, _)| {
                let display = self.display_of(&e)?;
                Ok((e, display))
            })
            .collect::<Result<Vec<_>, ServiceError>>()?;
        Ok(CatalogPage {
            category: category.clone(),
            total,
            page,
            per_page,
            sort_by: sort_by.cloned(),
            sort_dir,
            items,
        })
    }
}
