//! Writing results to files or standard output.

use std::fmt::Write as _;
use std::io::Write as _;

use graphon_sampling::{Error, Result};
use serde::Serialize;

use crate::OutputArgs;

/// Writes `text` to `--out`, or standard output when no path was given.
pub fn emit(out: &OutputArgs, text: &str) -> Result<()> {
    match &out.out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

/// CSV document: a `# {config}` metadata line, the header, then the rows.
pub fn csv_document<C: Serialize>(config: &C, header: &str, rows: &[String]) -> Result<String> {
    let meta = serde_json::to_string(config)?;
    if meta.contains('\n') {
        return Err(Error::InvalidParams("configuration must serialize to one line".into()));
    }
    let mut out = String::new();
    let _ = writeln!(out, "# {meta}");
    let _ = writeln!(out, "{header}");
    for row in rows {
        let _ = writeln!(out, "{row}");
    }
    Ok(out)
}

/// JSON document `{"config": ..., "rows": [...]}`.
pub fn json_document<C: Serialize, R: Serialize>(config: &C, rows: &[R]) -> Result<String> {
    #[derive(Serialize)]
    struct Doc<'a, C, R> {
        config: &'a C,
        rows: &'a [R],
    }
    graphon_sampling::io::to_json_string(&Doc { config, rows })
}
