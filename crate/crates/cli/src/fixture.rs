//! Page source backed by fixture files `<source_id>.page<k>.txt` (k from
//! 0), each holding newline-delimited decimal IDs.

use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use electorate_core::ingest::{page_index, Page, PageError, PageSource, PageToken};

use crate::formats::ids::read_ids;

/// Environment variable naming the fixture root directory.
pub const FIXTURE_DIR_ENV: &str = "ELECTORATE_FIXTURE_DIR";

#[derive(Debug, Clone)]
pub struct FixtureSource {
    root: PathBuf,
    source_id: String,
}

impl FixtureSource {
    pub fn new(root: impl Into<PathBuf>, source_id: impl Into<String>) -> Self {
        FixtureSource { root: root.into(), source_id: source_id.into() }
    }

    pub fn page_path(&self, k: usize) -> PathBuf {
        self.root.join(format!("{}.page{k}.txt", self.source_id))
    }

    /// Writes `pages` as fixture files under `root`.
    pub fn write(root: &Path, source_id: &str, pages: &[Vec<u64>]) -> std::io::Result<()> {
        let source = FixtureSource::new(root, source_id);
        for (k, page) in pages.iter().enumerate() {
            let mut text = String::with_capacity(page.len() * 8);
            for id in page {
                text.push_str(&id.to_string());
                text.push('\n');
            }
            fs::write(source.page_path(k), text)?;
        }
        Ok(())
    }
}

impl PageSource for FixtureSource {
    fn get_page(&mut self, token: &PageToken) -> Result<Page, PageError> {
        let k = page_index(token)?;
        let path = self.page_path(k);
        let file = fs::File::open(&path)
            .map_err(|e| PageError::Unavailable(format!("{}: {e}", path.display())))?;
        let ids = read_ids(BufReader::new(file)).map_err(|e| PageError::Malformed(format!("{}: {e}", path.display())))?;
        let next = self.page_path(k + 1).exists().then(|| PageToken((k + 1).to_string()));
        Ok(Page { ids, next })
    }
}
