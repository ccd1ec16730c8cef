//! Regenerates `data/synthetic.jsonl`.
use synsem_cli::fixtures::overfit_corpus;

fn main() -> synsem_core::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "data/synthetic.jsonl".into());
    synsem_core::ingest::write_jsonl(&path, &overfit_corpus())?;
    println!("wrote {path}");
    Ok(())
}
