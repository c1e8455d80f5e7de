//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.
//!
//! Tolerances are exact unless stated; time limits are checked on the
//! optimized test profile.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use jfs_core::dataio::{decode_mask_png, encode_mask_png, write_report, CandidateBank, ReportFormat};
use jfs_core::eval::{evaluate, is_excluded, summarize, Arbiter, EvalConfig, SampleRecord};
use jfs_core::fixtures::conformance_suite;
use jfs_core::maskcore::{iou, mean_iou, Rle};
use jfs_core::refine::assign_candidates;
use jfs_core::synth::{
    degrade_mask, generate_benchmark, generate_scene_with, splitmix64, BenchmarkConfig, DegradeConfig, DegradeMode,
    SceneConfig,
};
use jfs_core::{judge, BinaryMask, EchoBackend, JudgeCase, JudgeResult, JudgeSupport, PrototypeBackend, Verdict};

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

/// Tiny deterministic stream for drawing test instances.
struct Stream(u64);

impl Stream {
    fn next(&mut self) -> u64 {
        self.0 = splitmix64(self.0);
        self.0
    }

    fn below(&mut self, n: u64) -> u64 {
        self.next() % n
    }

    fn mask(&mut self, w: u32, h: u32) -> BinaryMask {
        let density = self.below(101);
        BinaryMask::from_fn(w, h, |_, _| self.below(100) < density)
    }
}

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(limit: Duration, started: Instant) -> Result<(), String> {
    let t = started.elapsed();
    check(t < limit, format!("took {t:.2?}, limit {limit:?}"))
}

fn counting_iou(a: &BinaryMask, b: &BinaryMask) -> f64 {
    let (mut inter, mut uni) = (0u32, 0u32);
    for y in 0..a.height() {
        for x in 0..a.width() {
            let (p, q) = (a.get(x, y), b.get(x, y));
            inter += u32::from(p && q);
            uni += u32::from(p || q);
        }
    }
    if uni == 0 {
        1.0
    } else {
        f64::from(inter) / f64::from(uni)
    }
}

fn c1_metric_oracle() -> Outcome {
    let started = Instant::now();
    let masks: Vec<BinaryMask> = (0u32..512).map(|bits| BinaryMask::from_fn(3, 3, |x, y| bits >> (y * 3 + x) & 1 == 1)).collect();
    let mut n = 0u64;
    for a in &masks {
        for b in &masks {
            let got = iou(a, b).map_err(|e| e.to_string())?;
            let want = counting_iou(a, b);
            check(got == want, format!("{a:?} vs {b:?}: {got} != {want}"))?;
            n += 1;
        }
    }
    within(Duration::from_secs(5), started)?;
    Ok(format!("{n} pairs exact in {:.2?}", started.elapsed()))
}

fn c2_round_trips() -> Outcome {
    let started = Instant::now();
    let mut s = Stream(2);
    for i in 0..10_000 {
        let (w, h) = (1 + s.below(40) as u32, 1 + s.below(40) as u32);
        let m = s.mask(w, h);
        let rle = Rle::from_bytes(&Rle::encode(&m).to_bytes()).and_then(|r| r.decode()).map_err(|e| e.to_string())?;
        check(rle == m, format!("RLE mismatch on mask {i}"))?;
        let png = decode_mask_png(&encode_mask_png(&m)).map_err(|e| e.to_string())?;
        check(png == m, format!("PNG mismatch on mask {i}"))?;
    }
    within(Duration::from_secs(10), started)?;
    Ok(format!("10000 masks exact in {:.2?}", started.elapsed()))
}

fn c3_assignment_brute_force() -> Outcome {
    let started = Instant::now();
    let mut s = Stream(3);
    for inst in 0..1000 {
        let n_classes = 1 + s.below(3) as u8;
        let coarse: BTreeMap<u8, BinaryMask> = (1..=n_classes).map(|k| (k, s.mask(8, 8))).collect();
        let n_cand = s.below(9) as usize;
        let bank = CandidateBank::new("x", (0..n_cand).map(|_| s.mask(8, 8)).collect());
        let got = assign_candidates(&coarse, &bank).map_err(|e| e.to_string())?;
        check(got.len() == n_cand, format!("instance {inst}: {} assignments for {n_cand} candidates", got.len()))?;
        for (j, cand) in bank.candidates.iter().enumerate() {
            let mut best: Option<(u8, u32)> = None;
            for (&k, m) in &coarse {
                let overlap = (0..64).filter(|&i| cand.get_index(i) && m.get_index(i)).count() as u32;
                check(
                    got[j].overlap_by_class.get(&k).copied() == Some(u64::from(overlap)),
                    format!("instance {inst} candidate {j} class {k}: overlap count"),
                )?;
                if overlap > 0 && best.is_none_or(|(_, b)| overlap > b) {
                    best = Some((k, overlap));
                }
            }
            check(
                got[j].assigned_class == best.map(|b| b.0),
                format!("instance {inst} candidate {j}: {:?} vs oracle {best:?}", got[j].assigned_class),
            )?;
        }
    }
    within(Duration::from_secs(5), started)?;
    Ok(format!("1000 instances exact in {:.2?}", started.elapsed()))
}

fn c4_oracle_dominance(bench42: &Path) -> Outcome {
    let started = Instant::now();
    let cfg = EvalConfig { seed: 42, ..EvalConfig::default() };
    let ev = evaluate(bench42, Arbiter::TrueIou, &cfg).map_err(|e| e.to_string())?;
    let recs: Vec<&SampleRecord> = ev.records.iter().collect();
    let row = summarize("all", &recs).map_err(|e| e.to_string())?;
    let maxes: Vec<f64> = ev.records.iter().map(|r| r.iou_coarse_true.max(r.iou_refined_true)).collect();
    let mean_max = mean_iou(&maxes).map_err(|e| e.to_string())?;
    check(row.miou_jfs == mean_max, format!("miou_jfs {} != mean max {mean_max}", row.miou_jfs))?;
    check(
        row.miou_jfs >= row.miou_coarse.max(row.miou_refined),
        format!("miou_jfs {} below a column", row.miou_jfs),
    )?;
    within(Duration::from_secs(30), started)?;
    Ok(format!(
        "n={} miou_jfs={:.4} = mean max, coarse={:.4} refined={:.4}",
        row.n, row.miou_jfs, row.miou_coarse, row.miou_refined
    ))
}

fn c5_judge_symmetry() -> Outcome {
    let scene = SceneConfig::default();
    let degrade = DegradeConfig {
        mode: DegradeMode::Marginal,
        boundary_jitter_radius: 2,
        blob_rate: 1.0,
        target_gap: (0.1, 0.7),
    };
    let backend = PrototypeBackend::default();
    let mut flips = 0;
    for i in 0..100u64 {
        let class_id = 1 + (i % 4) as u8;
        let err = |e: jfs_core::Error| format!("case {i}: {e}");
        let q = generate_scene_with(splitmix64(i), &scene, Some(class_id)).map_err(err)?;
        let s = generate_scene_with(splitmix64(i + 1000), &scene, Some(class_id)).map_err(err)?;
        let gt_q = q.gt.region_of(class_id);
        let coarse = degrade_mask(&gt_q, i, &degrade).map_err(err)?;
        let refined = degrade_mask(&gt_q, i + 7, &degrade).map_err(err)?;
        let gt_s = s.gt.region_of(class_id);
        let case = JudgeCase {
            query_image: &q.image,
            coarse: &coarse,
            refined: &refined,
            supports: vec![JudgeSupport { image: &s.image, mask: &gt_s }],
            class_id,
        };
        let swapped = JudgeCase { coarse: &refined, refined: &coarse, ..case.clone() };
        let a = judge(&backend, &case).map_err(err)?;
        let b = judge(&backend, &swapped).map_err(err)?;
        check(a.verdict.flipped() == b.verdict, format!("case {i}: {} vs {}", a.verdict, b.verdict))?;
        check(
            a.e_coarse == b.e_refined && a.e_refined == b.e_coarse,
            format!("case {i}: scores not swapped exactly"),
        )?;
        flips += usize::from(a.verdict != Verdict::Tie);
    }
    Ok(format!("100 cases exact ({flips} non-tie)"))
}

/// Independent nearest-neighbour rescale: source index floor(d * src / dst).
fn rescale(m: &BinaryMask, w: u32, h: u32) -> BinaryMask {
    let (sw, sh) = (u64::from(m.width()), u64::from(m.height()));
    BinaryMask::from_fn(w, h, |x, y| {
        let sx = u64::from(x) * sw / u64::from(w);
        let sy = u64::from(y) * sh / u64::from(h);
        m.get(sx as u32, sy as u32)
    })
}

fn c6_echo_closed_form() -> Outcome {
    let mut checked = 0;
    for f in conformance_suite() {
        if f.query_image == f.support_image {
            continue;
        }
        let case = JudgeCase {
            query_image: &f.query_image,
            coarse: &f.coarse,
            refined: &f.refined,
            supports: vec![JudgeSupport { image: &f.support_image, mask: &f.support_mask }],
            class_id: 1,
        };
        let r = judge(&EchoBackend, &case).map_err(|e| format!("fixture {}: {e}", f.index))?;
        let (w, h) = f.support_image.dims();
        let want_c = counting_iou(&rescale(&f.coarse, w, h), &f.support_mask);
        let want_r = counting_iou(&rescale(&f.refined, w, h), &f.support_mask);
        check(
            r.e_coarse.to_bits() == want_c.to_bits() && r.e_refined.to_bits() == want_r.to_bits(),
            format!("fixture {}: ({}, {}) vs ({want_c}, {want_r})", f.index, r.e_coarse, r.e_refined),
        )?;
        checked += 1;
    }
    check(checked == 50, format!("only {checked} of 50 fixtures usable"))?;
    Ok("50 fixtures bit-exact".into())
}

fn rate(records: &[SampleRecord], keep: impl Fn(f64) -> bool) -> (usize, f64) {
    let sel: Vec<&SampleRecord> = records.iter().filter(|r| keep(r.improvement().abs())).collect();
    let hits = sel.iter().filter(|r| r.success).count();
    (sel.len(), hits as f64 / sel.len().max(1) as f64)
}

fn c7_trend(bench42: &Path) -> Outcome {
    let started = Instant::now();
    let backend = PrototypeBackend::default();
    let cfg = EvalConfig { seed: 42, ..EvalConfig::default() };
    let ev = evaluate(bench42, Arbiter::Fss(&backend), &cfg).map_err(|e| e.to_string())?;
    let (n_big, big) = rate(&ev.records, |d| d >= 0.3);
    let (n_small, small) = rate(&ev.records, |d| d < 0.05);
    check(n_big > 0 && n_small > 0, format!("empty stratum: {n_big} large, {n_small} small"))?;
    check(big > small, format!("success |Δ|>=0.3 {big:.4} (n={n_big}) not above |Δ|<0.05 {small:.4} (n={n_small})"))?;
    within(Duration::from_secs(120), started)?;
    Ok(format!("success |Δ|>=0.3 {big:.4} (n={n_big}) > |Δ|<0.05 {small:.4} (n={n_small})"))
}

fn c8_rescue(tmp: &Path) -> Outcome {
    let started = Instant::now();
    let root = tmp.join("bench43");
    let config = BenchmarkConfig { corrupt_fraction: 0.8, ..BenchmarkConfig::default() };
    generate_benchmark(43, &config, &root).map_err(|e| e.to_string())?;
    let backend = PrototypeBackend::default();
    let cfg = EvalConfig { seed: 43, ..EvalConfig::default() };
    let ev = evaluate(&root, Arbiter::Fss(&backend), &cfg).map_err(|e| e.to_string())?;
    let recs: Vec<&SampleRecord> = ev.records.iter().collect();
    let row = summarize("all", &recs).map_err(|e| e.to_string())?;
    check(
        row.miou_jfs > row.miou_refined,
        format!("miou_jfs {:.4} not above miou_refined {:.4}", row.miou_jfs, row.miou_refined),
    )?;
    within(Duration::from_secs(120), started)?;
    Ok(format!("miou_jfs {:.4} > miou_refined {:.4} (n={})", row.miou_jfs, row.miou_refined, row.n))
}

fn c9_report_format(tmp: &Path) -> Outcome {
    let fixture = [
        (0.2, 0.8, Some(Verdict::RefinedBetter)),
        (0.9, 0.1, Some(Verdict::RefinedBetter)),
        (0.5, 0.5, Some(Verdict::Tie)),
        (0.0, 0.0, None),
    ];
    let records: Vec<SampleRecord> = fixture
        .iter()
        .enumerate()
        .filter(|(_, (c, r, _))| !is_excluded(*c, *r))
        .map(|(i, &(c, r, v))| {
            let v = v.expect("included samples carry a verdict");
            let scores = match v {
                Verdict::RefinedBetter => (0.0, 1.0),
                Verdict::CoarseBetter => (1.0, 0.0),
                Verdict::Tie => (0.5, 0.5),
            };
            SampleRecord::new(format!("s{i}"), 1, c, r, JudgeResult::from_per_support(vec![scores]))
        })
        .collect();
    let refs: Vec<&SampleRecord> = records.iter().collect();
    let row = summarize("fixture", &refs).map_err(|e| e.to_string())?;
    let report = jfs_core::eval::EvalReport { rows: vec![row] };
    let path = tmp.join("fixture.csv");
    write_report(&report, &path, ReportFormat::Csv).map_err(|e| e.to_string())?;
    let text = fs::read_to_string(&path).map_err(|e| e.to_string())?;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    check(header == "group,n,miou_coarse,miou_refined,miou_jfs,success_rate", format!("header `{header}`"))?;
    let line = lines.next().unwrap_or_default();
    let cells: Vec<&str> = line.split(',').collect();
    check(
        cells.len() == 6 && cells[1] == "3" && cells[4] == "0.4667" && cells[5] == "0.6667",
        format!("row `{line}`"),
    )?;
    Ok(format!("header exact; row `{line}`"))
}

fn c10_determinism(bench42: &Path, tmp: &Path) -> Outcome {
    let run = |out: &Path| -> Result<(), String> {
        let status = Command::new(env!("CARGO_BIN_EXE_jfs"))
            .args(["eval", "--dataset"])
            .arg(bench42)
            .args(["--seed", "42", "--shots", "2", "--groups", "top:20,bottom:20,random:20x4", "--out"])
            .arg(out)
            .env_remove("JFS_LOG")
            .stdout(std::process::Stdio::null())
            .status()
            .map_err(|e| e.to_string())?;
        check(status.success(), format!("jfs eval exited with {status}"))
    };
    let (a, b) = (tmp.join("eval_a"), tmp.join("eval_b"));
    run(&a)?;
    run(&b)?;
    for f in ["report.csv", "report.json", "details.csv"] {
        let (x, y) = (fs::read(a.join(f)), fs::read(b.join(f)));
        check(matches!((&x, &y), (Ok(x), Ok(y)) if x == y), format!("{f} differs between runs"))?;
    }
    Ok("report.csv, report.json, details.csv byte-identical".into())
}

fn main() {
    // `cargo test` passes harness flags such as filters; this gate always runs in full
    let tmp = tempfile::tempdir().expect("temp dir");
    let bench42 = tmp.path().join("bench42");
    let bench = generate_benchmark(42, &BenchmarkConfig::default(), &bench42).map_err(|e| e.to_string());

    let needs_bench = |f: &dyn Fn(&Path) -> Outcome| -> Outcome {
        match &bench {
            Ok(_) => f(&bench42),
            Err(e) => Err(format!("benchmark seed 42 failed: {e}")),
        }
    };
    let criteria: Vec<Criterion> = vec![
        ("metric oracle equivalence", Box::new(c1_metric_oracle)),
        ("RLE and PNG round-trips", Box::new(c2_round_trips)),
        ("candidate assignment brute force", Box::new(c3_assignment_brute_force)),
        ("oracle-judge dominance", Box::new(|| needs_bench(&c4_oracle_dominance))),
        ("judge symmetry", Box::new(c5_judge_symmetry)),
        ("echo closed form", Box::new(c6_echo_closed_form)),
        ("trend reproduction", Box::new(|| needs_bench(&c7_trend))),
        ("rescue property", Box::new(|| c8_rescue(tmp.path()))),
        ("report format", Box::new(|| c9_report_format(tmp.path()))),
        ("determinism", Box::new(|| needs_bench(&|b| c10_determinism(b, tmp.path())))),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
