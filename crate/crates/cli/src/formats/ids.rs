//! Newline-delimited decimal user IDs.

use std::io::{BufRead, Write};

use super::FormatError;

/// Parses one ID per line; blank lines and `#` comments are skipped.
pub fn read_ids<R: BufRead>(reader: R) -> Result<Vec<u64>, FormatError> {
    let mut ids = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let id = text
            .parse()
            .map_err(|e| FormatError::Parse { line: i + 1, reason: format!("bad id {text:?}: {e}") })?;
        ids.push(id);
    }
    Ok(ids)
}

pub fn write_ids<W: Write>(out: &mut W, ids: &[u64]) -> std::io::Result<()> {
    for id in ids {
        writeln!(out, "{id}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_reports_bad_lines() {
        assert_eq!(read_ids("1\n\n# c\n 3 \n2\n".as_bytes()).unwrap(), vec![1, 3, 2]);
        let err = read_ids("1\nx\n".as_bytes()).unwrap_err();
        assert!(matches!(err, FormatError::Parse { line: 2, .. }));
    }
}
