fn main() {
    let crate_dir = std::env::var("CARGO_MANIFEST_DIR").expect("manifest dir");
    let config = cbindgen::Config {
        language: cbindgen::Language::C,
        include_guard: Some("REGMOD_H".to_string()),
        documentation: true,
        cpp_compat: true,
        enumeration: cbindgen::EnumConfig {
            rename_variants: cbindgen::RenameRule::ScreamingSnakeCase,
            ..Default::default()
        },
        ..Default::default()
    };
    match cbindgen::Builder::new()
        .with_crate(&crate_dir)
        .with_config(config)
        .generate()
    {
        Ok(bindings) => {
            bindings.write_to_file(format!("{crate_dir}/include/regmod.h"));
        }
        // header generation must not break the build on minimal toolchains
        Err(err) => println!("cargo:warning=cbindgen skipped: {err}"),
    }
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");
}
