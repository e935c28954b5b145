//! Frozen output of every subcommand. Regenerate with `UPDATE_GOLDEN=1`.

use std::path::PathBuf;
use std::process::Command;

const CASES: [(&str, &[&str]); 5] = [
    (
        "sweep.csv",
        &["sweep", "--sweep", "dl:60m:200m:20m", "--p-ref", "40 dBm"],
    ),
    (
        "montecarlo.csv",
        &[
            "montecarlo",
            "--sweep",
            "dl:100m:140m:20m",
            "--p-ref",
            "40 dBm",
            "--sigma-v",
            "1 %",
            "--trials",
            "50",
            "--seed",
            "7",
        ],
    ),
    (
        "limit.txt",
        &["limit", "--p-ref", "40 dBm", "--eq40-as-printed"],
    ),
    (
        "allocate.txt",
        &["allocate", "--dl", "140 m", "--p-ref", "40 dBm"],
    ),
    (
        "allocate_physical.txt",
        &[
            "allocate",
            "--mode",
            "physical",
            "--n-segments",
            "4",
            "--p-ref",
            "40 dBm",
        ],
    ),
];

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

#[test]
fn subcommand_outputs_match_golden_files() {
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    for (file, args) in CASES {
        let out = Command::new(env!("CARGO_BIN_EXE_railbeam"))
            .args(args)
            .arg("--quiet")
            .output()
            .unwrap();
        assert!(
            out.status.success(),
            "{file}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let path = golden_dir().join(file);
        if update {
            std::fs::write(&path, &out.stdout).unwrap();
            continue;
        }
        let expected = std::fs::read(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert!(
            out.stdout == expected,
            "{file} differs from golden output:\n{}",
            String::from_utf8_lossy(&out.stdout)
        );
    }
}
