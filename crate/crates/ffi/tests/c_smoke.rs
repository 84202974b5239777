//! Compile and run a small C program against the generated header and
//! the static library, proving the ABI end to end.

use std::path::PathBuf;
use std::process::Command;

const C_PROGRAM: &str = r#"
#include <stdio.h>
#include <substruct.h>

int main(void) {
    substruct_problem *problem = NULL;
    uint32_t cells[3] = {2, 2, 2};
    uint32_t subs[3] = {2, 2, 2};
    if (substruct_problem_structured(3, cells, subs, &problem) != SUBSTRUCT_OK) {
        fprintf(stderr, "structured: %s\n", substruct_last_error());
        return 1;
    }
    uint64_t faces = 0, edges = 0, vertices = 0, interface_nodes = 0;
    if (substruct_classify_counts(problem, &faces, &edges, &vertices, &interface_nodes)
        != SUBSTRUCT_OK) {
        return 2;
    }
    if (faces != 12 || edges != 6 || vertices != 1 || interface_nodes != 61) {
        fprintf(stderr, "unexpected counts %llu %llu %llu %llu\n",
                (unsigned long long)faces, (unsigned long long)edges,
                (unsigned long long)vertices, (unsigned long long)interface_nodes);
        return 3;
    }
    substruct_corners *corners = NULL;
    if (substruct_select(problem, SUBSTRUCT_ALGORITHM_FULL, SUBSTRUCT_DIM_MODE_AUTO,
                         true, 0, 0, &corners) != SUBSTRUCT_OK) {
        return 4;
    }
    if (substruct_corners_len(corners) != 16) {
        return 5;
    }
    substruct_solve_report report;
    substruct_status status = substruct_solve(
        problem, corners, SUBSTRUCT_PDE_ELASTICITY, 1.0, 0.3,
        SUBSTRUCT_CONSTRAINTS_CEF, 1e-8, 500, &report);
    if (status != SUBSTRUCT_OK || !report.converged || report.iterations < 1) {
        fprintf(stderr, "solve failed: %s\n", substruct_last_error());
        return 6;
    }
    printf("converged in %llu iterations, kappa %.3f\n",
           (unsigned long long)report.iterations, report.kappa_est);
    substruct_corners_free(corners);
    substruct_problem_free(problem);
    return 0;
}
"#;

fn target_dir() -> PathBuf {
    // tests run from the workspace target profile directory's sibling
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    manifest.join("../../target/debug")
}

#[test]
fn c_program_links_and_runs() {
    let include = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include");
    let lib_dir = target_dir();
    let staticlib = lib_dir.join("libsubstruct_ffi.a");
    if !staticlib.exists() {
        // the staticlib target may not be produced for `cargo test`; build it
        let status = Command::new(env!("CARGO"))
            .args(["build", "-p", "substruct-ffi"])
            .status()
            .expect("cargo runs");
        assert!(status.success());
    }
    assert!(staticlib.exists(), "missing {staticlib:?}");

    let dir = tempfile::tempdir().unwrap();
    let c_path = dir.path().join("smoke.c");
    std::fs::write(&c_path, C_PROGRAM).unwrap();
    let exe = dir.path().join("smoke");
    let compile = Command::new("gcc")
        .arg(&c_path)
        .arg(&staticlib)
        .arg("-I")
        .arg(&include)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .output()
        .expect("gcc available");
    assert!(
        compile.status.success(),
        "gcc failed: {}",
        String::from_utf8_lossy(&compile.stderr)
    );
    let run = Command::new(&exe).output().expect("smoke binary runs");
    assert!(
        run.status.success(),
        "smoke exited {:?}: {}",
        run.status.code(),
        String::from_utf8_lossy(&run.stderr)
    );
    let out = String::from_utf8_lossy(&run.stdout);
    assert!(out.contains("converged in"), "unexpected output {out}");
}
