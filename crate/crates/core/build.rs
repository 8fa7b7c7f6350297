use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

fn main() {
    let manifest = Path::new("data/MANIFEST.sha256");
    println!("cargo:rerun-if-changed={}", manifest.display());
    let text = fs::read_to_string(manifest).expect("data/MANIFEST.sha256 is missing");
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let mut parts = line.split_whitespace();
        let (Some(expected), Some(name)) = (parts.next(), parts.next()) else {
            panic!("malformed manifest line: {line}");
        };
        let path = Path::new("data").join(name);
        println!("cargo:rerun-if-changed={}", path.display());
        let bytes = fs::read(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let actual: String = Sha256::digest(&bytes)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect();
        if actual != expected {
            panic!(
                "checksum mismatch for {}: manifest {expected}, file {actual}",
                path.display()
            );
        }
    }
}
