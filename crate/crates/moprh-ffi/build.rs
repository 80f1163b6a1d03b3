use std::env;
use std::path::PathBuf;

fn main() {
    let crate_dir = PathBuf::from(env::var("CARGO_MANIFEST_DIR").unwrap());
    let header = crate_dir.join("include").join("moprh.h");

    let mut config = cbindgen::Config::default();
    config.language = cbindgen::Language::C;
    config.include_guard = Some("MOPRH_H".into());
    config.documentation = true;
    config.cpp_compat = true;
    config.enumeration.prefix_with_name = true;
    config.header = Some(
        "/* C interface to the moprh verification library.\n * Generated by cbindgen; do not edit by hand. */"
            .into(),
    );

    match cbindgen::generate_with_config(&crate_dir, config) {
        Ok(bindings) => {
            bindings.write_to_file(&header);
        }
        Err(e) => {
            // keep the previously generated header usable during e.g. `cargo check`
            println!("cargo:warning=cbindgen failed: {e}");
        }
    }
    println!("cargo:rerun-if-changed=src/lib.rs");
}
