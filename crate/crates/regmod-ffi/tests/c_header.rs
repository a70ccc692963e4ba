//! Compile and run a small C program against the generated header and the
//! static library, proving the ABI is usable from plain C.

use std::path::PathBuf;
use std::process::Command;

const C_PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include <string.h>
#include "regmod.h"

int main(void) {
    RegmodInstance *inst = NULL;
    if (regmod_instance_by_name("zq3", &inst) != REGMOD_OK) return 1;
    if (regmod_instance_dimension(inst) != 3) return 2;

    const double x[3] = {1.1, 0.9, 0.0};
    double value = 0.0;
    if (regmod_evaluate(inst, x, 3, &value) != REGMOD_OK) return 3;
    if (fabs(value - 0.02) > 1e-12) return 4;

    double sdist = 0.0;
    if (regmod_subdiff_distance(inst, x, 3, &sdist) != REGMOD_OK) return 5;
    if (fabs(sdist - sqrt(0.08)) > 1e-12) return 6;

    const double partial[3] = {1.0, 0.0, 0.0};
    if (regmod_subdiff_distance(inst, partial, 3, &sdist) != REGMOD_ERR_NO_FORMULA) return 7;
    if (strlen(regmod_last_error()) == 0) return 8;

    double cdist = 0.0;
    if (regmod_critical_distance(inst, x, 3, &cdist) != REGMOD_OK) return 9;
    if (fabs(cdist - 0.2 / sqrt(2.0)) > 1e-12) return 10;

    char *json = NULL;
    const double base[3] = {1.0, 1.0, 0.0};
    const double radii[3] = {0.2, 0.1, 0.05};
    if (regmod_estimate_json(inst, base, 3, radii, 3, 64, 7, &json) != REGMOD_OK) return 11;
    if (strstr(json, "\"subregularity\"") == NULL) return 12;
    regmod_string_free(json);

    regmod_instance_free(inst);

    RegmodInstance *bad = NULL;
    if (regmod_instance_by_name("no-such-instance", &bad) != REGMOD_ERR_CONFIG) return 13;

    puts("c abi ok");
    return 0;
}
"#;

fn target_profile_dir() -> PathBuf {
    // .../target/<profile>/deps/test-bin → .../target/<profile>
    let exe = std::env::current_exe().expect("test executable path");
    exe.parent()
        .and_then(|deps| deps.parent())
        .expect("profile dir")
        .to_path_buf()
}

#[test]
fn c_program_links_and_runs() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header_dir = manifest.join("include");
    assert!(
        header_dir.join("regmod.h").exists(),
        "header not generated; build.rs should have produced include/regmod.h"
    );
    let profile = target_profile_dir();
    let staticlib = profile.join("libregmod_ffi.a");
    assert!(
        staticlib.exists(),
        "static library missing at {}",
        staticlib.display()
    );

    let work = tempfile_dir();
    let c_path = work.join("smoke.c");
    let bin_path = work.join("smoke");
    std::fs::write(&c_path, C_PROGRAM).unwrap();

    let compile = Command::new("cc")
        .arg("-std=c11")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(&header_dir)
        .arg(&c_path)
        .arg(&staticlib)
        .args(["-lpthread", "-ldl", "-lm"])
        .arg("-o")
        .arg(&bin_path)
        .output()
        .expect("invoke cc");
    assert!(
        compile.status.success(),
        "cc failed:\n{}",
        String::from_utf8_lossy(&compile.stderr)
    );

    let run = Command::new(&bin_path).output().expect("run smoke binary");
    assert!(
        run.status.success(),
        "smoke binary exited {:?}:\n{}",
        run.status.code(),
        String::from_utf8_lossy(&run.stdout)
    );
    assert!(String::from_utf8_lossy(&run.stdout).contains("c abi ok"));
    std::fs::remove_dir_all(&work).ok();
}

fn tempfile_dir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("regmod-ffi-smoke-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
