//! Bottom-up evaluation of the SPARQL algebra over a [`Dataset`].

use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::sync::Arc;

use spargebra::algebra::{AggregateExpression, AggregateFunction, GraphPattern, OrderExpression, PropertyPathExpression};
use spargebra::term::{GroundTerm, NamedNodePattern, TermPattern, TriplePattern};
use spargebra::Query;

use super::expr::{self, Value};
use super::memory::{Dataset, GraphSel};
use super::{SelectResult, SparqlError};
use crate::rdf::{Literal, NamedNode, Term};

pub(crate) type Solution = Vec<Value>;

pub(crate) fn get(sol: &Solution, slot: usize) -> Option<&Arc<Term>> {
    sol.get(slot).and_then(|v| v.as_ref())
}

pub(crate) fn set(sol: &mut Solution, slot: usize, value: Arc<Term>) {
    if sol.len() <= slot {
        sol.resize(slot + 1, None);
    }
    sol[slot] = Some(value);
}

fn compatible(a: &Solution, b: &Solution) -> bool {
    a.iter()
        .zip(b.iter())
        .all(|(x, y)| match (x, y) {
            (Some(x), Some(y)) => x == y,
            _ => true,
        })
}

fn merge(a: &Solution, b: &Solution) -> Solution {
    let len = a.len().max(b.len());
    (0..len)
        .map(|i| a.get(i).cloned().flatten().or_else(|| b.get(i).cloned().flatten()))
        .collect()
}

fn shares_binding(a: &Solution, b: &Solution) -> bool {
    a.iter().zip(b.iter()).any(|(x, y)| x.is_some() && y.is_some())
}

/// Slots bound in every solution.
fn always_bound(sols: &[Solution]) -> BTreeSet<usize> {
    let Some(first) = sols.first() else {
        return BTreeSet::new();
    };
    let mut slots: BTreeSet<usize> = (0..first.len()).filter(|&i| first[i].is_some()).collect();
    for s in &sols[1..] {
        slots.retain(|&i| get(s, i).is_some());
        if slots.is_empty() {
            break;
        }
    }
    slots
}

type ExistsCache = HashMap<(*const GraphPattern, GraphSel), Arc<Vec<Solution>>>;

pub(crate) struct Evaluator<'a> {
    pub(crate) ds: &'a Dataset,
    slots: RefCell<HashMap<String, usize>>,
    exists_cache: RefCell<ExistsCache>,
    pub(crate) regex_cache: RefCell<HashMap<(String, String), Option<regex::Regex>>>,
    pub(crate) now: chrono::DateTime<chrono::Utc>,
}

impl<'a> Evaluator<'a> {
    pub(crate) fn new(ds: &'a Dataset) -> Self {
        Self {
            ds,
            slots: RefCell::default(),
            exists_cache: RefCell::default(),
            regex_cache: RefCell::default(),
            now: chrono::Utc::now(),
        }
    }

    pub(crate) fn slot(&self, name: &str) -> usize {
        let mut slots = self.slots.borrow_mut();
        let next = slots.len();
        *slots.entry(name.to_owned()).or_insert(next)
    }

    fn term_slot(&self, pattern: &TermPattern) -> Option<usize> {
        match pattern {
            TermPattern::Variable(v) => Some(self.slot(v.as_str())),
            TermPattern::BlankNode(b) => Some(self.slot(&format!("_:{}", b.as_str()))),
            _ => None,
        }
    }

    pub(crate) fn select(&self, query: &Query) -> Result<SelectResult, SparqlError> {
        let Query::Select { pattern, dataset, .. } = query else {
            return Err(SparqlError::Unsupported("only SELECT queries are supported".into()));
        };
        if dataset.is_some() {
            return Err(SparqlError::Unsupported("FROM / FROM NAMED".into()));
        }
        let solutions = self.eval(pattern, GraphSel::Default)?;
        let variables: Vec<String> = match projection(pattern) {
            Some(vars) => vars.iter().map(|v| v.as_str().to_owned()).collect(),
            None => {
                let slots = self.slots.borrow();
                let mut named: Vec<(&String, &usize)> = slots.iter().filter(|(k, _)| !k.starts_with("_:")).collect();
                named.sort_by_key(|(_, v)| **v);
                named.into_iter().map(|(k, _)| k.clone()).collect()
            }
        };
        let slots: Vec<(String, usize)> = variables.iter().map(|v| (v.clone(), self.slot(v))).collect();
        let rows = solutions
            .iter()
            .map(|sol| {
                slots
                    .iter()
                    .filter_map(|(name, slot)| get(sol, *slot).map(|t| (name.clone(), (**t).clone())))
                    .collect::<BTreeMap<_, _>>()
            })
            .collect();
        Ok(SelectResult { variables, rows })
    }

    pub(crate) fn eval(&self, pattern: &GraphPattern, graph: GraphSel) -> Result<Vec<Solution>, SparqlError> {
        match pattern {
            GraphPattern::Bgp { patterns } => self.extend_bgp(vec![Vec::new()], patterns, graph),
            GraphPattern::Path { subject, path, object } => self.extend_path(vec![Vec::new()], subject, path, object, graph),
            GraphPattern::Join { left, right } => {
                let left = self.eval(left, graph)?;
                match right.as_ref() {
                    GraphPattern::Bgp { patterns } => self.extend_bgp(left, patterns, graph),
                    GraphPattern::Path { subject, path, object } => self.extend_path(left, subject, path, object, graph),
                    other => {
                        let right = self.eval(other, graph)?;
                        Ok(hash_join(left, &right))
                    }
                }
            }
            GraphPattern::LeftJoin { left, right, expression } => {
                let left = self.eval(left, graph)?;
                let mut out = Vec::new();
                if let GraphPattern::Bgp { patterns } = right.as_ref() {
                    for l in left {
                        let mut extended = self.extend_bgp(vec![l.clone()], patterns, graph)?;
                        if let Some(e) = expression {
                            extended.retain(|s| self.ebv(e, s, graph) == Some(true));
                        }
                        if extended.is_empty() {
                            out.push(l);
                        } else {
                            out.extend(extended);
                        }
                    }
                    return Ok(out);
                }
                let right = self.eval(right, graph)?;
                let index = JoinIndex::new(&left, &right);
                for l in left {
                    let mut matched = false;
                    for r in index.candidates(&l) {
                        if !compatible(&l, r) {
                            continue;
                        }
                        let m = merge(&l, r);
                        if let Some(e) = expression {
                            if self.ebv(e, &m, graph) != Some(true) {
                                continue;
                            }
                        }
                        matched = true;
                        out.push(m);
                    }
                    if !matched {
                        out.push(l);
                    }
                }
                Ok(out)
            }
            GraphPattern::Filter { expr, inner } => {
                let mut sols = self.eval(inner, graph)?;
                sols.retain(|s| self.ebv(expr, s, graph) == Some(true));
                Ok(sols)
            }
            GraphPattern::Union { left, right } => {
                let mut l = self.eval(left, graph)?;
                l.extend(self.eval(right, graph)?);
                Ok(l)
            }
            GraphPattern::Graph { name, inner } => match name {
                NamedNodePattern::NamedNode(n) => {
                    match self.ds.id_of(&Term::NamedNode(NamedNode::new_unchecked(n.as_str()))) {
                        Some(g) => self.eval(inner, GraphSel::Named(g)),
                        None => Ok(Vec::new()),
                    }
                }
                NamedNodePattern::Variable(v) => {
                    let slot = self.slot(v.as_str());
                    let mut out = Vec::new();
                    for g in self.ds.named_graphs() {
                        let name = self.ds.term(g).clone();
                        for mut s in self.eval(inner, GraphSel::Named(g))? {
                            match get(&s, slot) {
                                Some(existing) if *existing != name => continue,
                                _ => set(&mut s, slot, name.clone()),
                            }
                            out.push(s);
                        }
                    }
                    Ok(out)
                }
            },
            GraphPattern::Extend { inner, variable, expression } => {
                let slot = self.slot(variable.as_str());
                let mut sols = self.eval(inner, graph)?;
                for s in &mut sols {
                    if let Some(v) = self.value(expression, s, graph) {
                        set(s, slot, v);
                    }
                }
                Ok(sols)
            }
            GraphPattern::Minus { left, right } => {
                let left = self.eval(left, graph)?;
                let right = self.eval(right, graph)?;
                Ok(left
                    .into_iter()
                    .filter(|l| !right.iter().any(|r| shares_binding(l, r) && compatible(l, r)))
                    .collect())
            }
            GraphPattern::Values { variables, bindings } => {
                let slots: Vec<usize> = variables.iter().map(|v| self.slot(v.as_str())).collect();
                Ok(bindings
                    .iter()
                    .map(|row| {
                        let mut s = Vec::new();
                        for (slot, value) in slots.iter().zip(row) {
                            if let Some(v) = value.as_ref().and_then(ground_term) {
                                set(&mut s, *slot, Arc::new(v));
                            }
                        }
                        s
                    })
                    .collect())
            }
            GraphPattern::OrderBy { inner, expression } => {
                let sols = self.eval(inner, graph)?;
                let mut keyed: Vec<(Vec<Value>, Solution)> = sols
                    .into_iter()
                    .map(|s| {
                        let keys = expression
                            .iter()
                            .map(|e| match e {
                                OrderExpression::Asc(e) | OrderExpression::Desc(e) => self.value(e, &s, graph),
                            })
                            .collect();
                        (keys, s)
                    })
                    .collect();
                keyed.sort_by(|(a, _), (b, _)| {
                    for ((x, y), e) in a.iter().zip(b).zip(expression) {
                        let ord = expr::order_cmp(x.as_deref(), y.as_deref());
                        let ord = if matches!(e, OrderExpression::Desc(_)) { ord.reverse() } else { ord };
                        if ord != Ordering::Equal {
                            return ord;
                        }
                    }
                    Ordering::Equal
                });
                Ok(keyed.into_iter().map(|(_, s)| s).collect())
            }
            GraphPattern::Project { inner, variables } => {
                let slots: Vec<usize> = variables.iter().map(|v| self.slot(v.as_str())).collect();
                let sols = self.eval(inner, graph)?;
                Ok(sols
                    .into_iter()
                    .map(|s| {
                        let mut out = Vec::new();
                        for &slot in &slots {
                            if let Some(v) = get(&s, slot) {
                                set(&mut out, slot, v.clone());
                            }
                        }
                        out
                    })
                    .collect())
            }
            GraphPattern::Distinct { inner } | GraphPattern::Reduced { inner } => {
                let sols = self.eval(inner, graph)?;
                let mut seen = HashSet::new();
                Ok(sols.into_iter().filter(|s| seen.insert(trimmed(s))).collect())
            }
            GraphPattern::Slice { inner, start, length } => {
                let sols = self.eval(inner, graph)?;
                let it = sols.into_iter().skip(*start);
                Ok(match length {
                    Some(n) => it.take(*n).collect(),
                    None => it.collect(),
                })
            }
            GraphPattern::Group { inner, variables, aggregates } => {
                let sols = self.eval(inner, graph)?;
                self.group(sols, variables, aggregates, graph)
            }
            GraphPattern::Service { .. } => Err(SparqlError::Unsupported("SERVICE".into())),
            #[allow(unreachable_patterns)]
            other => Err(SparqlError::Unsupported(format!("{other}"))),
        }
    }

    /// Results of `pattern` evaluated once per graph, for EXISTS checks.
    pub(crate) fn exists(&self, pattern: &GraphPattern, seed: &Solution, graph: GraphSel) -> Option<bool> {
        if let GraphPattern::Bgp { patterns } = pattern {
            return self
                .extend_bgp(vec![seed.clone()], patterns, graph)
                .ok()
                .map(|s| !s.is_empty());
        }
        let key = (pattern as *const GraphPattern, graph);
        let cached = self.exists_cache.borrow().get(&key).cloned();
        let sols = match cached {
            Some(s) => s,
            None => {
                let s = Arc::new(self.eval(pattern, graph).ok()?);
                self.exists_cache.borrow_mut().insert(key, s.clone());
                s
            }
        };
        Some(sols.iter().any(|s| compatible(seed, s)))
    }

    fn resolve(&self, pattern: &TermPattern, sol: &Solution) -> Resolved {
        let term = match pattern {
            TermPattern::NamedNode(n) => Term::NamedNode(NamedNode::new_unchecked(n.as_str())),
            TermPattern::Literal(l) => Term::Literal(convert_literal(l)),
            TermPattern::Variable(_) | TermPattern::BlankNode(_) => {
                let slot = self.term_slot(pattern).expect("variable");
                return match get(sol, slot) {
                    Some(t) => match self.ds.id_of(t) {
                        Some(id) => Resolved::Id(id),
                        None => Resolved::Missing,
                    },
                    None => Resolved::Free(slot),
                };
            }
            #[allow(unreachable_patterns)]
            _ => return Resolved::Missing,
        };
        match self.ds.id_of(&term) {
            Some(id) => Resolved::Id(id),
            None => Resolved::Missing,
        }
    }

    fn resolve_predicate(&self, pattern: &NamedNodePattern, sol: &Solution) -> Resolved {
        match pattern {
            NamedNodePattern::NamedNode(n) => self.resolve(&TermPattern::NamedNode(n.clone()), sol),
            NamedNodePattern::Variable(v) => self.resolve(&TermPattern::Variable(v.clone()), sol),
        }
    }

    fn extend_bgp(&self, seeds: Vec<Solution>, patterns: &[TriplePattern], graph: GraphSel) -> Result<Vec<Solution>, SparqlError> {
        let order = self.plan(patterns, seeds.first());
        let mut sols = seeds;
        for i in order {
            let tp = &patterns[i];
            let mut next = Vec::new();
            for sol in &sols {
                let s = self.resolve(&tp.subject, sol);
                let p = self.resolve_predicate(&tp.predicate, sol);
                let o = self.resolve(&tp.object, sol);
                if [s, p, o].iter().any(|r| matches!(r, Resolved::Missing)) {
                    continue;
                }
                for [ms, mp, mo] in self.ds.matching(s.id(), p.id(), o.id(), graph) {
                    let mut out = sol.clone();
                    if bind(&mut out, s, ms, self.ds) && bind(&mut out, p, mp, self.ds) && bind(&mut out, o, mo, self.ds) {
                        next.push(out);
                    }
                }
            }
            sols = next;
            if sols.is_empty() {
                break;
            }
        }
        Ok(sols)
    }

    /// Greedy join order: most constrained pattern first, preferring
    /// patterns that share variables with what is already bound.
    fn plan(&self, patterns: &[TriplePattern], seed: Option<&Solution>) -> Vec<usize> {
        let mut bound: HashSet<usize> = seed
            .map(|s| (0..s.len()).filter(|&i| s[i].is_some()).collect())
            .unwrap_or_default();
        let mut remaining: Vec<usize> = (0..patterns.len()).collect();
        let mut order = Vec::with_capacity(patterns.len());
        while !remaining.is_empty() {
            let (pos, _) = remaining
                .iter()
                .enumerate()
                .map(|(pos, &i)| (pos, self.cost(&patterns[i], &bound)))
                .min_by_key(|(_, c)| *c)
                .expect("non-empty");
            let i = remaining.remove(pos);
            let tp = &patterns[i];
            for slot in [self.term_slot(&tp.subject), self.predicate_slot(&tp.predicate), self.term_slot(&tp.object)]
                .into_iter()
                .flatten()
            {
                bound.insert(slot);
            }
            order.push(i);
        }
        order
    }

    fn predicate_slot(&self, p: &NamedNodePattern) -> Option<usize> {
        match p {
            NamedNodePattern::Variable(v) => Some(self.slot(v.as_str())),
            NamedNodePattern::NamedNode(_) => None,
        }
    }

    fn cost(&self, tp: &TriplePattern, bound: &HashSet<usize>) -> u32 {
        let free = |slot: Option<usize>| slot.is_some_and(|s| !bound.contains(&s));
        let s = free(self.term_slot(&tp.subject));
        let p = free(self.predicate_slot(&tp.predicate));
        let o = free(self.term_slot(&tp.object));
        match (s, p, o) {
            (false, false, false) => 0,
            (false, false, true) => 1,
            (true, false, false) => 2,
            (false, true, false) => 3,
            (false, true, true) => 4,
            (true, false, true) => 5,
            (true, true, false) => 6,
            (true, true, true) => 7,
        }
    }

    fn extend_path(
        &self,
        seeds: Vec<Solution>,
        subject: &TermPattern,
        path: &PropertyPathExpression,
        object: &TermPattern,
        graph: GraphSel,
    ) -> Result<Vec<Solution>, SparqlError> {
        let mut out = Vec::new();
        for sol in seeds {
            let s = self.resolve(subject, &sol);
            let o = self.resolve(object, &sol);
            if matches!(s, Resolved::Missing) || matches!(o, Resolved::Missing) {
                continue;
            }
            let pairs: Vec<(u32, u32)> = match (s.id(), o.id()) {
                (Some(s), _) => self.forward(path, s, graph).into_iter().map(|o| (s, o)).collect(),
                (None, Some(o)) => self.backward(path, o, graph).into_iter().map(|s| (s, o)).collect(),
                (None, None) => self.all_pairs(path, graph),
            };
            for (ps, po) in pairs {
                let mut next = sol.clone();
                if bind(&mut next, s, ps, self.ds) && bind(&mut next, o, po, self.ds) {
                    out.push(next);
                }
            }
        }
        Ok(out)
    }

    fn predicate_id(&self, p: &spargebra::term::NamedNode) -> Option<u32> {
        self.ds.id_of(&Term::NamedNode(NamedNode::new_unchecked(p.as_str())))
    }

    fn forward(&self, path: &PropertyPathExpression, node: u32, g: GraphSel) -> Vec<u32> {
        match path {
            PropertyPathExpression::NamedNode(p) => match self.predicate_id(p) {
                Some(p) => self.ds.matching(Some(node), Some(p), None, g).into_iter().map(|t| t[2]).collect(),
                None => Vec::new(),
            },
            PropertyPathExpression::Reverse(inner) => self.backward(inner, node, g),
            PropertyPathExpression::Sequence(a, b) => self
                .forward(a, node, g)
                .into_iter()
                .flat_map(|mid| self.forward(b, mid, g))
                .collect(),
            PropertyPathExpression::Alternative(a, b) => {
                let mut v = self.forward(a, node, g);
                v.extend(self.forward(b, node, g));
                v
            }
            PropertyPathExpression::ZeroOrMore(inner) => self.closure(inner, node, g, true, true).into_iter().collect(),
            PropertyPathExpression::OneOrMore(inner) => self.closure(inner, node, g, false, true).into_iter().collect(),
            PropertyPathExpression::ZeroOrOne(inner) => {
                let mut set: BTreeSet<u32> = self.forward(inner, node, g).into_iter().collect();
                set.insert(node);
                set.into_iter().collect()
            }
            PropertyPathExpression::NegatedPropertySet(excluded) => {
                let excluded: HashSet<u32> = excluded.iter().filter_map(|p| self.predicate_id(p)).collect();
                self.ds
                    .matching(Some(node), None, None, g)
                    .into_iter()
                    .filter(|t| !excluded.contains(&t[1]))
                    .map(|t| t[2])
                    .collect()
            }
        }
    }

    fn backward(&self, path: &PropertyPathExpression, node: u32, g: GraphSel) -> Vec<u32> {
        match path {
            PropertyPathExpression::NamedNode(p) => match self.predicate_id(p) {
                Some(p) => self.ds.matching(None, Some(p), Some(node), g).into_iter().map(|t| t[0]).collect(),
                None => Vec::new(),
            },
            PropertyPathExpression::Reverse(inner) => self.forward(inner, node, g),
            PropertyPathExpression::Sequence(a, b) => self
                .backward(b, node, g)
                .into_iter()
                .flat_map(|mid| self.backward(a, mid, g))
                .collect(),
            PropertyPathExpression::Alternative(a, b) => {
                let mut v = self.backward(a, node, g);
                v.extend(self.backward(b, node, g));
                v
            }
            PropertyPathExpression::ZeroOrMore(inner) => self.closure(inner, node, g, true, false).into_iter().collect(),
            PropertyPathExpression::OneOrMore(inner) => self.closure(inner, node, g, false, false).into_iter().collect(),
            PropertyPathExpression::ZeroOrOne(inner) => {
                let mut set: BTreeSet<u32> = self.backward(inner, node, g).into_iter().collect();
                set.insert(node);
                set.into_iter().collect()
            }
            PropertyPathExpression::NegatedPropertySet(excluded) => {
                let excluded: HashSet<u32> = excluded.iter().filter_map(|p| self.predicate_id(p)).collect();
                self.ds
                    .matching(None, None, Some(node), g)
                    .into_iter()
                    .filter(|t| !excluded.contains(&t[1]))
                    .map(|t| t[0])
                    .collect()
            }
        }
    }

    fn closure(&self, path: &PropertyPathExpression, start: u32, g: GraphSel, reflexive: bool, forward: bool) -> BTreeSet<u32> {
        let step = |n: u32| if forward { self.forward(path, n, g) } else { self.backward(path, n, g) };
        let mut seen = BTreeSet::new();
        if reflexive {
            seen.insert(start);
        }
        let mut frontier: Vec<u32> = step(start);
        while let Some(n) = frontier.pop() {
            if seen.insert(n) {
                frontier.extend(step(n));
            }
        }
        seen
    }

    fn all_pairs(&self, path: &PropertyPathExpression, g: GraphSel) -> Vec<(u32, u32)> {
        match path {
            PropertyPathExpression::NamedNode(p) => match self.predicate_id(p) {
                Some(p) => self.ds.matching(None, Some(p), None, g).into_iter().map(|t| (t[0], t[2])).collect(),
                None => Vec::new(),
            },
            PropertyPathExpression::Reverse(inner) => self.all_pairs(inner, g).into_iter().map(|(a, b)| (b, a)).collect(),
            _ => {
                let mut out = Vec::new();
                for n in self.ds.nodes(g) {
                    for o in self.forward(path, n, g) {
                        out.push((n, o));
                    }
                }
                out
            }
        }
    }

    fn group(
        &self,
        sols: Vec<Solution>,
        variables: &[spargebra::term::Variable],
        aggregates: &[(spargebra::term::Variable, AggregateExpression)],
        graph: GraphSel,
    ) -> Result<Vec<Solution>, SparqlError> {
        let key_slots: Vec<usize> = variables.iter().map(|v| self.slot(v.as_str())).collect();
        let mut order: Vec<Vec<Value>> = Vec::new();
        let mut groups: HashMap<Vec<Value>, Vec<Solution>> = HashMap::new();
        for s in sols {
            let key: Vec<Value> = key_slots.iter().map(|&k| get(&s, k).cloned()).collect();
            groups
                .entry(key.clone())
                .or_insert_with(|| {
                    order.push(key);
                    Vec::new()
                })
                .push(s);
        }
        if order.is_empty() && key_slots.is_empty() {
            order.push(Vec::new());
            groups.insert(Vec::new(), Vec::new());
        }
        let agg_slots: Vec<usize> = aggregates.iter().map(|(v, _)| self.slot(v.as_str())).collect();
        let mut out = Vec::with_capacity(order.len());
        for key in order {
            let rows = &groups[&key];
            let mut sol = Vec::new();
            for (slot, value) in key_slots.iter().zip(&key) {
                if let Some(v) = value {
                    set(&mut sol, *slot, v.clone());
                }
            }
            for ((_, agg), slot) in aggregates.iter().zip(&agg_slots) {
                if let Some(v) = self.aggregate(agg, rows, graph) {
                    set(&mut sol, *slot, v);
                }
            }
            out.push(sol);
        }
        Ok(out)
    }

    fn aggregate(&self, agg: &AggregateExpression, rows: &[Solution], graph: GraphSel) -> Value {
        match agg {
            AggregateExpression::CountSolutions { distinct } => {
                let n = if *distinct {
                    rows.iter().map(trimmed).collect::<HashSet<_>>().len()
                } else {
                    rows.len()
                };
                Some(expr::integer(n as i64))
            }
            AggregateExpression::FunctionCall { name, expr: e, distinct } => {
                let mut values: Vec<Arc<Term>> = Vec::new();
                for r in rows {
                    if let Some(v) = self.value(e, r, graph) {
                        values.push(v);
                    }
                }
                if *distinct {
                    let mut seen = HashSet::new();
                    values.retain(|v| seen.insert(v.clone()));
                }
                match name {
                    AggregateFunction::Count => Some(expr::integer(values.len() as i64)),
                    AggregateFunction::Sum => expr::sum(&values),
                    AggregateFunction::Avg => expr::avg(&values),
                    AggregateFunction::Min => values.into_iter().min_by(|a, b| expr::order_cmp(Some(a), Some(b))),
                    AggregateFunction::Max => values.into_iter().max_by(|a, b| expr::order_cmp(Some(a), Some(b))),
                    AggregateFunction::Sample => values.into_iter().next(),
                    AggregateFunction::GroupConcat { separator } => {
                        if values.iter().any(|v| !expr::is_string_term(v)) {
                            return None;
                        }
                        let sep = separator.as_deref().unwrap_or(" ");
                        let joined = values.iter().map(|v| v.value()).collect::<Vec<_>>().join(sep);
                        Some(Arc::new(Term::Literal(Literal::new_simple(joined))))
                    }
                    AggregateFunction::Custom(n) => {
                        tracing::debug!(function = n.as_str(), "unsupported custom aggregate");
                        None
                    }
                }
            }
        }
    }
}

#[derive(Clone, Copy)]
enum Resolved {
    Id(u32),
    Free(usize),
    Missing,
}

impl Resolved {
    fn id(self) -> Option<u32> {
        match self {
            Resolved::Id(i) => Some(i),
            _ => None,
        }
    }
}

fn bind(sol: &mut Solution, r: Resolved, id: u32, ds: &Dataset) -> bool {
    match r {
        Resolved::Id(x) => x == id,
        Resolved::Free(slot) => match get(sol, slot) {
            Some(existing) => ds.id_of(existing) == Some(id),
            None => {
                set(sol, slot, ds.term(id).clone());
                true
            }
        },
        Resolved::Missing => false,
    }
}

fn trimmed(s: &Solution) -> Solution {
    let mut s = s.clone();
    while s.last().is_some_and(|v| v.is_none()) {
        s.pop();
    }
    s
}

/// Hash index over the right side of a join, keyed on slots bound on both sides.
struct JoinIndex<'r> {
    keys: Vec<usize>,
    buckets: HashMap<Vec<Arc<Term>>, Vec<&'r Solution>>,
    all: Vec<&'r Solution>,
}

impl<'r> JoinIndex<'r> {
    fn new(left: &[Solution], right: &'r [Solution]) -> Self {
        let keys: Vec<usize> = always_bound(left).intersection(&always_bound(right)).copied().collect();
        let mut buckets: HashMap<Vec<Arc<Term>>, Vec<&Solution>> = HashMap::new();
        if !keys.is_empty() {
            for r in right {
                let k = keys.iter().map(|&i| get(r, i).expect("always bound").clone()).collect();
                buckets.entry(k).or_default().push(r);
            }
        }
        Self {
            keys,
            buckets,
            all: right.iter().collect(),
        }
    }

    fn candidates(&self, l: &Solution) -> &[&'r Solution] {
        if self.keys.is_empty() {
            return &self.all;
        }
        let k: Vec<Arc<Term>> = self.keys.iter().map(|&i| get(l, i).expect("always bound").clone()).collect();
        self.buckets.get(&k).map_or(&[], |v| v.as_slice())
    }
}

fn hash_join(left: Vec<Solution>, right: &[Solution]) -> Vec<Solution> {
    let index = JoinIndex::new(&left, right);
    let mut out = Vec::new();
    for l in &left {
        for r in index.candidates(l) {
            if compatible(l, r) {
                out.push(merge(l, r));
            }
        }
    }
    out
}

fn projection(pattern: &GraphPattern) -> Option<&[spargebra::term::Variable]> {
    match pattern {
        GraphPattern::Project { variables, .. } => Some(variables),
        GraphPattern::Distinct { inner }
        | GraphPattern::Reduced { inner }
        | GraphPattern::Slice { inner, .. }
        | GraphPattern::OrderBy { inner, .. } => projection(inner),
        _ => None,
    }
}

pub(crate) fn convert_literal(l: &spargebra::term::Literal) -> Literal {
    match l.language() {
        Some(lang) => Literal::new_language_tagged(l.value(), lang).unwrap_or_else(|_| Literal::new_simple(l.value())),
        None => Literal::new_typed(l.value(), NamedNode::new_unchecked(l.datatype().as_str())),
    }
}

fn ground_term(t: &GroundTerm) -> Option<Term> {
    match t {
        GroundTerm::NamedNode(n) => Some(Term::NamedNode(NamedNode::new_unchecked(n.as_str()))),
        GroundTerm::Literal(l) => Some(Term::Literal(convert_literal(l))),
        #[allow(unreachable_patterns)]
        _ => None,
    }
}
