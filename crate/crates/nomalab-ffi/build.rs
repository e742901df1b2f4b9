//! Regenerates `include/nomalab.h` from the extern declarations in
//! `src/lib.rs`. The header is committed so C users can build without the
//! Rust toolchain; a failed regeneration downgrades to a warning and leaves
//! the committed copy in place (a test checks it still matches the API).

use std::path::Path;

fn main() {
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");
    let crate_dir = std::env::var("CARGO_MANIFEST_DIR").expect("cargo sets the manifest dir");
    let header = Path::new(&crate_dir).join("include").join("nomalab.h");
    match cbindgen::generate(&crate_dir) {
        Ok(bindings) => {
            bindings.write_to_file(&header);
        }
        Err(error) => println!("cargo:warning=header generation failed: {error}"),
    }
}
