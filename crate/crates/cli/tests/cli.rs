use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use jfs_core::dataio::{
    class_mask_path, load_class_masks, load_mask, save_image, save_mask, write_candidate_bank, write_split,
    CandidateBank, Split, COARSE_DIR,
};
use jfs_core::fss::resample_nearest;
use jfs_core::maskcore::iou;
use jfs_core::{BinaryMask, LabelMap, RgbImage};

fn jfs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jfs"))
        .args(args)
        .env_remove("JFS_LOG")
        .output()
        .expect("run jfs")
}

fn ok(args: &[&str]) -> String {
    let out = jfs(args);
    assert!(
        out.status.success(),
        "jfs {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for e in fs::read_dir(&dir).unwrap() {
            let path = e.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.insert(path.strip_prefix(root).unwrap().display().to_string(), fs::read(&path).unwrap());
            }
        }
    }
    out
}

#[test]
fn exit_codes() {
    assert_eq!(jfs(&["--help"]).status.code(), Some(0));
    assert_eq!(jfs(&["eval", "--help"]).status.code(), Some(0));
    assert_eq!(jfs(&["synth", "--seed", "1", "--corrupt-fraction", "1.5", "--out", "x"]).status.code(), Some(2));
    assert_eq!(jfs(&["eval", "--frobnicate"]).status.code(), Some(2));
    assert_eq!(
        jfs(&["judge", "--query", "q.png", "--coarse", "c.png", "--refined", "r.png"]).status.code(),
        Some(2)
    );
    assert_eq!(jfs(&["eval", "--dataset", "x", "--seed", "1", "--out", "o", "--groups", "top:0"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope");
    let out = jfs(&["eval", "--dataset", p(&missing), "--seed", "1", "--out", p(&dir.path().join("o"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("train.txt"));
}

#[test]
fn synth_is_byte_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let stdout = ok(&["synth", "--seed", "42", "--n", "16", "--support-pool", "8", "--out", p(d.path())]);
        assert_eq!(stdout.trim(), p(&d.path().join("manifest.json")));
    }
    assert!(tree(a.path()) == tree(b.path()));
}

#[test]
fn eval_matches_golden_and_is_deterministic() {
    let bench = tempfile::tempdir().unwrap();
    ok(&["synth", "--seed", "42", "--out", p(bench.path())]);
    let o1 = bench.path().join("o1");
    let o2 = bench.path().join("o2");
    let stdout = ok(&["eval", "--dataset", p(bench.path()), "--seed", "42", "--out", p(&o1)]);
    ok(&["eval", "--dataset", p(bench.path()), "--seed", "42", "--jobs", "3", "--out", p(&o2)]);
    let golden = include_str!("golden/report_seed42.csv");
    assert_eq!(fs::read_to_string(o1.join("report.csv")).unwrap(), golden);
    assert_eq!(stdout, golden);
    for f in ["report.csv", "report.json", "details.csv"] {
        assert_eq!(fs::read(o1.join(f)).unwrap(), fs::read(o2.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn eval_group_names_follow_arguments() {
    let bench = tempfile::tempdir().unwrap();
    ok(&["synth", "--seed", "3", "--n", "24", "--support-pool", "8", "--out", p(bench.path())]);
    let out = bench.path().join("o");
    let stdout = ok(&[
        "eval", "--dataset", p(bench.path()), "--seed", "3", "--backend", "builtin:echo", "--groups",
        "bottom:5,top:5,random:2x4", "--out", p(&out),
    ]);
    let names: Vec<&str> = stdout.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(names, ["bottom5", "top5", "random8"]);
}

fn write_image(path: &Path, w: u32, h: u32, rgb: [u8; 3]) {
    save_image(path, &RgbImage::filled(w, h, rgb)).unwrap();
}

#[test]
fn judge_prints_tie_and_echo_closed_form() {
    let d = tempfile::tempdir().unwrap();
    let q = d.path().join("q.png");
    let s = d.path().join("s.png");
    write_image(&q, 4, 4, [10, 10, 10]);
    write_image(&s, 8, 6, [90, 90, 90]);
    let coarse = BinaryMask::from_fn(4, 4, |x, y| x + y < 3);
    let refined = BinaryMask::from_fn(4, 4, |x, _| x < 2);
    let gt = BinaryMask::from_fn(8, 6, |x, y| x < 4 && y > 0);
    for (name, m) in [("c.png", &coarse), ("r.png", &refined), ("gt.png", &gt)] {
        save_mask(&d.path().join(name), m).unwrap();
    }
    let support = format!("{}:{}", p(&s), p(&d.path().join("gt.png")));
    let base = ["judge", "--query", p(&q), "--support", &support];

    let tie = ok(&[&base[..], &["--coarse", p(&d.path().join("c.png")), "--refined", p(&d.path().join("c.png"))]].concat());
    let v: serde_json::Value = serde_json::from_str(tie.trim()).unwrap();
    assert_eq!(v["verdict"], "Tie");

    let echo = ok(&[
        &base[..],
        &["--coarse", p(&d.path().join("c.png")), "--refined", p(&d.path().join("r.png")), "--backend", "builtin:echo"],
    ]
    .concat());
    let v: serde_json::Value = serde_json::from_str(echo.trim()).unwrap();
    assert_eq!(v["e_coarse"].as_f64().unwrap(), iou(&resample_nearest(&coarse, 8, 6), &gt).unwrap());
    assert_eq!(v["e_refined"].as_f64().unwrap(), iou(&resample_nearest(&refined, 8, 6), &gt).unwrap());
    assert_eq!(v["verdict"], "RefinedBetter");
}

/// One image whose coarse mask touches a large background segment.
fn refine_fixture(root: &Path, with_candidates: bool) -> (BinaryMask, Vec<BinaryMask>) {
    let (w, h) = (10, 10);
    write_image(&root.join("images/a.png"), w, h, [0, 0, 0]);
    let labels = LabelMap::new(w, h, vec![0; 100], 255).unwrap();
    jfs_core::dataio::save_labels(&root.join("labels/a.png"), &labels).unwrap();
    write_split(root, Split::Train, &["a".to_string()]).unwrap();
    let coarse = BinaryMask::from_fn(w, h, |x, y| (2..6).contains(&x) && (2..6).contains(&y));
    save_mask(&class_mask_path(&root.join(COARSE_DIR), "a", 3), &coarse).unwrap();
    let object = BinaryMask::from_fn(w, h, |x, y| (1..5).contains(&x) && (1..5).contains(&y));
    let rest = object.not();
    let bank = vec![object, rest];
    if with_candidates {
        write_candidate_bank(&root.join("candidates"), &CandidateBank::new("a", bank.clone())).unwrap();
    }
    (coarse, bank)
}

#[test]
fn refine_fallbacks_and_reload() {
    let d = tempfile::tempdir().unwrap();
    let (coarse, bank) = refine_fixture(d.path(), false);
    let out = d.path().join("out");
    assert_eq!(ok(&["refine", "--dataset", p(d.path()), "--out", p(&out)]).trim(), "1");
    assert_eq!(load_mask(&class_mask_path(&out, "a", 3)).unwrap(), coarse);

    let d = tempfile::tempdir().unwrap();
    refine_fixture(d.path(), true);
    let strict = d.path().join("strict");
    ok(&["refine", "--dataset", p(d.path()), "--out", p(&strict), "--min-overlap", "1.0"]);
    assert_eq!(load_mask(&class_mask_path(&strict, "a", 3)).unwrap(), coarse);

    // τ = 0 keeps both candidates: the background segment engulfs the frame
    let loose = d.path().join("loose");
    ok(&["refine", "--dataset", p(d.path()), "--out", p(&loose)]);
    let got = load_class_masks(&loose, "a").unwrap();
    assert_eq!(got[&3], bank[0].or(&bank[1]).unwrap());

    let mid = d.path().join("mid");
    ok(&["refine", "--dataset", p(d.path()), "--out", p(&mid), "--min-overlap", "0.5"]);
    assert_eq!(load_mask(&class_mask_path(&mid, "a", 3)).unwrap(), bank[0]);
}

#[test]
fn refine_reports_offending_file() {
    let d = tempfile::tempdir().unwrap();
    refine_fixture(d.path(), true);
    save_mask(&d.path().join("candidates/a_1.png"), &BinaryMask::empty(3, 3)).unwrap();
    let out = jfs(&["refine", "--dataset", p(d.path()), "--out", p(&d.path().join("o"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("a_1.png"));
}
