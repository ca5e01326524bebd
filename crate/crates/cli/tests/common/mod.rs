use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use cci_ring::Manifest;

/// Every file under `dir` by relative path; manifests lose their wall time.
pub fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
                continue;
            }
            let rel = path
                .strip_prefix(dir)
                .unwrap()
                .to_string_lossy()
                .into_owned();
            let bytes = if rel.ends_with("manifest.json") {
                let mut m = Manifest::read(&path).unwrap();
                assert!(m.remove("wall_time_s").is_some());
                m.to_json().unwrap().into_bytes()
            } else {
                fs::read(&path).unwrap()
            };
            out.insert(rel, bytes);
        }
    }
    out
}
