//! Graph corpora, optionally memoized on disk under `AUTOMATA_CACHE_DIR`.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::graph::{enumerate_connected, graph_from_value, graph_to_value, parse_graph, LabeledGraph};

pub const CACHE_ENV: &str = "AUTOMATA_CACHE_DIR";

fn cache_file(dir: &Path, max_nodes: usize) -> PathBuf {
    dir.join(format!("connected-{max_nodes}.json"))
}

/// All connected unlabeled graphs with 2 to `max_nodes` nodes, up to
/// isomorphism. Reads and refreshes the cache when the environment
/// variable is set; an unreadable cache is rebuilt.
pub fn connected_corpus(max_nodes: usize) -> Vec<LabeledGraph> {
    let Some(dir) = std::env::var_os(CACHE_ENV).map(PathBuf::from) else {
        return enumerate_connected(max_nodes);
    };
    let path = cache_file(&dir, max_nodes);
    if let Ok(text) = std::fs::read_to_string(&path) {
        if let Ok(serde_json::Value::Array(items)) = serde_json::from_str::<serde_json::Value>(&text) {
            if let Ok(gs) = items.iter().map(graph_from_value).collect::<Result<Vec<_>>>() {
                return gs;
            }
        }
    }
    let gs = enumerate_connected(max_nodes);
    let doc = serde_json::Value::Array(gs.iter().map(graph_to_value).collect());
    if std::fs::create_dir_all(&dir).is_ok() {
        let tmp = path.with_extension("tmp");
        if std::fs::write(&tmp, doc.to_string()).is_ok() {
            let _ = std::fs::rename(&tmp, &path);
        }
    }
    gs
}

/// Every `*.json` graph in a directory, sorted by file name.
pub fn load_corpus_dir(dir: &Path) -> Result<Vec<(String, LabeledGraph)>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::domain(format!("cannot read {}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let text = std::fs::read_to_string(&p)
                .map_err(|e| Error::domain(format!("cannot read {}: {e}", p.display())))?;
            let g = parse_graph(&text)?;
            Ok((p.file_name().unwrap().to_string_lossy().into_owned(), g))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cache_roundtrip() {
        let dir = std::env::temp_dir().join(format!("distauto-cache-{}", std::process::id()));
        std::env::set_var(CACHE_ENV, &dir);
        let first = connected_corpus(4);
        assert!(cache_file(&dir, 4).exists());
        let second = connected_corpus(4);
        std::env::remove_var(CACHE_ENV);
        assert_eq!(first.len(), 9);
        assert_eq!(first.len(), second.len());
        for (a, b) in first.iter().zip(&second) {
            assert_eq!(a.edges(), b.edges());
        }
        let _ = std::fs::remove_dir_all(&dir);
    }
}
