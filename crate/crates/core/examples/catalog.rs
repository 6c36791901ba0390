//! Browse the sample catalog: categories with counts, then sorted pages.

use quadvault::rdf::nquads::iri;
use quadvault::sample;
use quadvault::service::SortDir;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let service = sample::service();
    for c in service.list_categories()? {
        println!("{:<20} {:>4}", c.display_name, c.count);
    }

    let chapters = iri("http://purl.org/spar/fabio/BookChapter");
    let title = iri("http://purl.org/dc/terms/title");
    let page = service.get_page(&chapters, 1, 20, Some(&title), SortDir::Asc)?;
    println!("\n{} items, page {} of {}", page.total, page.page, page.total.div_ceil(page.per_page as u64));
    for (entity, label) in page.items.iter().take(5) {
        println!("  {label}\n    {entity}");
    }
    let last = service.get_page(&chapters, 4, 50, None, SortDir::Asc)?;
    println!("page 4 at 50 per page holds {} items", last.items.len());
    Ok(())
}
