//! Acceptance criteria, one line of output each.
//!
//! Runs with a custom main so every criterion reports PASS or FAIL even when an
//! earlier one fails. Exits non-zero if any criterion fails.

use std::collections::HashSet;
use std::f64::consts::TAU;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use digitfract::approx::{enumerate_approximation, is_member};
use digitfract::cli::{run_command, JobConfig, Payload, Report};
use digitfract::dimension::covering_count;
use digitfract::fourier::{fourier_coefficient, NaturalMeasure};
use digitfract::progressions::{construct_ap, longest_ap, search_ap, ArithmeticProgression};
use digitfract::{DigitSystem, Error, PositionSet};

type Check = Result<String, String>;

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn load(name: &str) -> JobConfig {
    let text = std::fs::read_to_string(configs_dir().join(name)).expect("config exists");
    JobConfig::from_json(&text).expect("config parses")
}

fn run(name: &str) -> Result<Report, String> {
    run_command(&load(name)).map_err(|e| format!("{name}: {e}"))
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn sys(b: u32, d: &[u32]) -> DigitSystem {
    DigitSystem::new(b, d).unwrap()
}

// Membership rules restated independently of the library.
fn in_odds(n: u64) -> bool {
    n % 2 == 1
}

fn in_periodic_3(n: u64) -> bool {
    !n.is_multiple_of(3)
}

fn in_cubes(n: u64) -> bool {
    let mut j = 1u64;
    while (j + 1).pow(3) < n {
        j += 1;
    }
    j.pow(3) < n && n <= j.pow(3) + j
}

fn rationals(system: &DigitSystem, s: &PositionSet, depth: u64) -> Vec<BigRational> {
    enumerate_approximation(system, s, depth, 1 << 22)
        .unwrap()
        .endpoints()
        .iter()
        .map(|p| p.to_rational())
        .collect()
}

fn pow_rational(b: u32, e: u64) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(b).pow(e as u32))
}

fn criterion_1() -> Check {
    let families: [(&str, PositionSet, fn(u64) -> bool); 3] = [
        ("odds", PositionSet::odds(), in_odds),
        ("periodic(3,{1,2})", PositionSet::periodic(3, &[1, 2]).unwrap(), in_periodic_3),
        ("cube-blocks", PositionSet::cube_blocks(), in_cubes),
    ];
    let mut cases = 0;
    for b in [2u32, 3] {
        for system in DigitSystem::all_for_base(b).unwrap() {
            for (name, s, rule) in &families {
                for n in 1..=12u64 {
                    let free = (1..=n).filter(|&j| rule(j)).count() as u32;
                    let expected = BigUint::from(b).pow(free)
                        * BigUint::from(system.allowed_count()).pow(n as u32 - free);
                    let a = enumerate_approximation(&system, s, n, 1 << 22).unwrap();
                    ensure(BigUint::from(a.len()) == expected, || {
                        format!("b={b} D={:?} {name} n={n}: {} != {expected}", system.allowed(), a.len())
                    })?;
                    let distinct: HashSet<_> = a.members.iter().collect();
                    ensure(distinct.len() == a.len(), || format!("{name} n={n}: duplicates"))?;
                    cases += 1;
                }
            }
        }
    }
    let r = run("enumerate_cantor_cubes.json")?;
    let Payload::Enumerate(e) = &r.result else { return Err("wrong payload".into()) };
    ensure(e.count == 3u64.pow(3) * 2u64.pow(9), || format!("config count {}", e.count))?;
    Ok(format!("{cases} (b, D, S, n) cases match M_n exactly"))
}

fn criterion_2() -> Check {
    let dims = |name: &str| -> Result<(f64, f64, bool), String> {
        let r = run(name)?;
        let Payload::Dims(d) = &r.result else { return Err("wrong payload".into()) };
        let exact = d.report.hausdorff.exactness.is_exact() && d.report.assouad.exactness.is_exact();
        Ok((d.report.hausdorff.value, d.report.assouad.value, exact))
    };
    let (h, a, exact) = dims("dims_odds.json")?;
    ensure(h == 0.5 && a == 0.5 && exact, || format!("odds: hdim {h}, adim {a}, exact {exact}"))?;
    let (h, a, exact) = dims("dims_cube_blocks.json")?;
    ensure(h == 0.0 && a == 1.0 && exact, || format!("cube blocks: hdim {h}, adim {a}, exact {exact}"))?;
    let (h, _, _) = dims("dims_cantor_cube_blocks.json")?;
    let closed = 2f64.ln() / 3f64.ln();
    ensure((h - closed).abs() <= 1e-12, || format!("b=3 cube blocks: hdim {h} vs {closed}"))?;
    Ok(format!("odds 0.5/0.5, cube blocks 0/1, b=3 cube blocks hdim {h:.14}"))
}

fn criterion_3() -> Check {
    let mut shown = Vec::new();
    for (file, num, den) in [
        ("construct_s_03.json", 3u64, 10u64),
        ("construct_s_05.json", 1, 2),
        ("construct_s_075.json", 3, 4),
    ] {
        let r = run(file)?;
        let Payload::ConstructS(c) = &r.result else { return Err("wrong payload".into()) };
        let m2 = c.identity[0].boundary;
        let expected_m2 = (2 * den).div_ceil(num).max(2);
        ensure(c.segments[0].upper == expected_m2, || {
            format!("{file}: M_2 = {} but the default rule gives {expected_m2}", c.segments[0].upper)
        })?;
        ensure(c.identity.len() == 3, || format!("{file}: {} identity rows", c.identity.len()))?;
        for row in &c.identity {
            let floor = (num as u128 * row.boundary as u128 / den as u128) as u64;
            let counted = (1..=row.boundary)
                .filter(|&n| c.segments.iter().any(|s| n > s.lower && (n <= s.run_end || n == s.upper)))
                .count() as u64;
            ensure(row.count == floor && counted == floor, || {
                format!(
                    "{file}: i={} M={} count {} / recount {counted} vs floor {floor}",
                    row.i, row.boundary, row.count
                )
            })?;
        }
        shown.push(format!(
            "s={num}/{den} M_2={m2} M_6={}",
            c.identity[2].boundary
        ));
    }
    Ok(shown.join(", "))
}

/// The criterion-4 progression and the depth-(p+R) enumeration it lives in.
fn cube_progression() -> Result<(ArithmeticProgression, Vec<BigRational>, u64), String> {
    let system = sys(2, &[0]);
    let s = PositionSet::cube_blocks();
    let k = 16u64;
    let run_len = (0..).find(|&r| 2u64.pow(r) >= k).unwrap() as u64;
    let start = (1..)
        .find(|&n| (n..n + run_len).all(in_cubes))
        .unwrap();
    let depth = start - 1 + run_len;
    let ap = construct_ap(&system, &s, k, 1_000_000, None).map_err(|e| e.to_string())?;
    let points = rationals(&system, &s, depth);
    Ok((ap, points, depth))
}

fn criterion_4() -> Check {
    let (ap, points, depth) = cube_progression()?;
    let system = sys(2, &[0]);
    let gap = pow_rational(2, depth);
    ensure(ap.length == 16 && ap.witnesses.len() == 16, || format!("{} terms", ap.length))?;
    ensure(ap.gap == gap, || format!("gap {} vs 2^-{depth}", ap.gap))?;
    for (w, p) in ap.witnesses.iter().zip(ap.points()) {
        let by_rule = w
            .digits()
            .iter()
            .enumerate()
            .all(|(i, &d)| d == 0 || in_cubes(i as u64 + 1));
        let by_lib = is_member(&system, w, &PositionSet::cube_blocks()).unwrap();
        ensure(by_rule && by_lib, || format!("{w} is not a member"))?;
        ensure(w.value().to_rational() == p, || format!("{w} is not the term {p}"))?;
    }
    let found = search_ap(&points, 16, 10_000)
        .map_err(|e| e.to_string())?
        .ok_or("search found no 16-term progression")?;
    ensure(found.gap == gap, || format!("search gap {} vs {gap}", found.gap))?;
    let config = run("ap_search_cube_blocks.json")?;
    let Payload::ApSearch(s) = &config.result else { return Err("wrong payload".into()) };
    ensure(s.progression.as_ref().map(|p| &p.gap) == Some(&gap), || "config search disagrees".into())?;
    Ok(format!(
        "16 certified terms, gap 2^-{depth}; search over {} points agrees",
        points.len()
    ))
}

fn criterion_5() -> Check {
    let system = sys(2, &[0]);
    for e in 1..=6u32 {
        let horizon = 10u64.pow(e);
        match construct_ap(&system, &PositionSet::odds(), 4, horizon, None) {
            Err(Error::RunNotFound { .. }) => {}
            other => return Err(format!("horizon {horizon}: {other:?}")),
        }
    }
    let longest = |s: &PositionSet| -> Result<Vec<usize>, String> {
        (8..=12)
            .map(|n| {
                longest_ap(&rationals(&system, s, n), 10_000)
                    .map(|l| l.k_max)
                    .map_err(|e| e.to_string())
            })
            .collect()
    };
    // frozen from an independent brute-force run over all pairs
    let odds = longest(&PositionSet::odds())?;
    ensure(odds == vec![2; 5], || format!("odds depths 8..12: {odds:?}"))?;
    let cubes = longest(&PositionSet::cube_blocks())?;
    ensure(cubes == vec![2, 2, 4, 4, 4], || format!("cube blocks depths 8..12: {cubes:?}"))?;
    // positions 11 and 12 are restricted, so growth is non-decreasing rather than
    // strict at every step
    let grows = cubes.windows(2).all(|w| w[0] <= w[1]) && cubes[4] > cubes[0];
    ensure(grows, || format!("cube blocks do not grow: {cubes:?}"))?;
    let r = run("ap_construct_odds.json");
    ensure(r.is_err(), || "config run unexpectedly succeeded".into())?;
    Ok(format!("RunNotFound up to 10^6; odds {odds:?}; cube blocks {cubes:?}"))
}

fn criterion_6() -> Check {
    let r = run("ap_search_fixture.json")?;
    let Payload::ApSearch(s) = &r.result else { return Err("wrong payload".into()) };
    ensure(s.outcome == "none" && s.candidates == 200, || format!("outcome {}", s.outcome))?;
    // independent check: x_i, x_j, 2x_j - x_i over all pairs
    let pts: Vec<BigRational> = (1..=200u64)
        .map(|n| BigRational::new(BigInt::one(), BigInt::from(n).pow(3)))
        .collect();
    let set: HashSet<&BigRational> = pts.iter().collect();
    for (i, a) in pts.iter().enumerate() {
        for b in &pts[i + 1..] {
            let c = b + b - a;
            ensure(!set.contains(&c), || format!("{a}, {b}, {c}"))?;
        }
    }
    Ok("no 3-term progression among {1/n^3 : n <= 200}".into())
}

/// Atoms `a` of the depth-`n` discretization, as integers over `b^n`.
fn atoms(system: &DigitSystem, s: &PositionSet, depth: u64) -> (Vec<BigUint>, BigUint) {
    let a = enumerate_approximation(system, s, depth, 1 << 12).unwrap();
    let modulus = BigUint::from(system.base()).pow(depth as u32);
    let scale = BigRational::from_integer(BigInt::from(modulus.clone()));
    let atoms = a
        .endpoints()
        .iter()
        .map(|p| (p.to_rational() * &scale).to_integer().to_biguint().unwrap())
        .collect();
    (atoms, modulus)
}

fn direct_sum(atoms: &[BigUint], modulus: &BigUint, m: i64) -> Complex64 {
    let md = modulus.to_f64().unwrap();
    let mut sum = Complex64::zero();
    for a in atoms {
        let r = (a * BigUint::from(m.unsigned_abs())) % modulus;
        sum += Complex64::from_polar(1.0, -TAU * r.to_f64().unwrap() / md);
    }
    let v = sum / atoms.len() as f64;
    if m < 0 { v.conj() } else { v }
}

fn criterion_7() -> Check {
    let freqs: Vec<i64> = (0..200i64).map(|j| (j * 7919 + 13) % 20_001 - 10_000).collect();
    let mut worst = 0f64;
    let mut cases = 0;
    for b in [2u32, 3] {
        for system in DigitSystem::all_for_base(b).unwrap() {
            for s in [PositionSet::odds(), PositionSet::cube_blocks()] {
                let depth = (1..)
                    .take_while(|&n| {
                        digitfract::approx::basic_interval_count(&system, &s, n).unwrap()
                            <= BigUint::from(4096u32)
                    })
                    .last()
                    .unwrap();
                let mu = NaturalMeasure::new(system.clone(), s.clone());
                let (atoms, modulus) = atoms(&system, &s, depth);
                for &m in &freqs {
                    let v = fourier_coefficient(&mu, m, depth).unwrap().value;
                    let err = (v - direct_sum(&atoms, &modulus, m)).norm();
                    worst = worst.max(err);
                    ensure(err <= 1e-12, || format!("b={b} {s} N={depth} m={m}: {err:e}"))?;
                    cases += 1;
                }
            }
        }
    }
    Ok(format!("{cases} coefficients, max deviation {worst:.1e}"))
}

fn criterion_8() -> Check {
    // frozen from an independent high-depth product evaluation
    const ODDS_B2: f64 = 0.6926289126994456;
    const C_B2: f64 = 0.69;
    const ODDS_B3: f64 = 0.409667168471023;
    const C_B3: f64 = 0.40;
    let check = |file: &str, frozen: f64, c: f64| -> Result<f64, String> {
        let r = run(file)?;
        let Payload::FourierScan(rows) = &r.result else { return Err("wrong payload".into()) };
        let mut floor = f64::INFINITY;
        for row in rows {
            ensure(row.next_in_s == (row.k % 2 == 0), || format!("k={} flag", row.k))?;
            if row.next_in_s {
                ensure(row.abs <= 1e-12, || format!("{file} k={}: {:e}", row.k, row.abs))?;
            } else {
                ensure(row.abs > c && (row.abs - frozen).abs() < 1e-9, || {
                    format!("{file} k={}: {}", row.k, row.abs)
                })?;
                floor = floor.min(row.abs);
            }
        }
        // the large-frequency end of the scan stays above c
        let last = rows.iter().rev().find(|r| !r.next_in_s).ok_or("no odd k")?;
        ensure(last.abs > c, || format!("{file}: tail {}", last.abs))?;
        Ok(floor)
    };
    let b2 = check("fourier_scan_odds.json", ODDS_B2, C_B2)?;
    let b3 = check("fourier_scan_cantor_odds.json", ODDS_B3, C_B3)?;
    Ok(format!(
        "b=2: 0 at even k, min {b2:.12} > {C_B2} at odd k; b=3: min {b3:.12} > {C_B3}"
    ))
}

fn criterion_9() -> Check {
    let (ap, points, _) = cube_progression()?;
    let k = ap.length as u64;
    let r = ap.gap.clone();
    let big_r = &ap.gap * BigInt::from(k - 1);
    let stats = covering_count(&points, &r, &big_r, Some(std::slice::from_ref(&ap.start)))
        .map_err(|e| e.to_string())?;
    let own = covering_count(&ap.points(), &r, &big_r, Some(std::slice::from_ref(&ap.start)))
        .map_err(|e| e.to_string())?;
    ensure(stats.count >= k, || {
        format!(
            "N_(r,R) = {} < k = {k} with r = gap (terms alone: {}); closed r-balls hold 3 terms, so N = ceil(k/3)",
            stats.count, own.count
        )
    })?;
    Ok(format!("N_(r,R) = {} >= {k}", stats.count))
}

fn strip_timing(json: &str) -> String {
    json.lines()
        .filter(|l| !l.trim_start().starts_with("\"elapsed_ms\""))
        .collect::<Vec<_>>()
        .join("\n")
}

fn criterion_10() -> Check {
    let mut files: Vec<PathBuf> = std::fs::read_dir(configs_dir())
        .map_err(|e| e.to_string())?
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    for path in &files {
        let name = path.file_name().unwrap().to_string_lossy().to_string();
        let config = load(&name);
        match (run_command(&config), run_command(&config)) {
            (Ok(a), Ok(b)) => {
                let (ja, jb) = (a.without_timing().to_json(), b.without_timing().to_json());
                ensure(ja == jb, || format!("{name}: reports differ"))?;
                ensure(a.to_csv().ok() == b.to_csv().ok(), || format!("{name}: csv differs"))?;
                let back = Report::from_json(&a.to_json()).map_err(|e| format!("{name}: {e}"))?;
                ensure(back == a, || format!("{name}: round trip changed the report"))?;
            }
            (Err(a), Err(b)) => ensure(a == b, || format!("{name}: errors differ"))?,
            _ => return Err(format!("{name}: outcome differs between runs")),
        }
    }

    // the binary: byte-identical output files and exit codes
    let exe = env!("CARGO_BIN_EXE_digitfract");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    for name in ["dims_cube_blocks.json", "fourier_scan_odds.json", "ap_search_fixture.json"] {
        let mut outputs = Vec::new();
        for i in 0..2 {
            let out = dir.path().join(format!("{name}.{i}"));
            let status = Command::new(exe)
                .arg(configs_dir().join(name))
                .arg("--out")
                .arg(&out)
                .env_remove("DIGITFRACT_BUDGET")
                .status()
                .map_err(|e| e.to_string())?;
            ensure(status.code() == Some(0), || format!("{name}: exit {status}"))?;
            outputs.push(std::fs::read_to_string(&out).map_err(|e| e.to_string())?);
        }
        ensure(strip_timing(&outputs[0]) == strip_timing(&outputs[1]), || {
            format!("{name}: binary output differs")
        })?;
        let csv = || {
            Command::new(exe)
                .arg(configs_dir().join(name))
                .args(["--format", "csv"])
                .output()
                .map(|o| o.stdout)
        };
        ensure(csv().ok() == csv().ok(), || format!("{name}: csv differs"))?;
    }
    let code = |path: &Path| {
        Command::new(exe)
            .arg(path)
            .env_remove("DIGITFRACT_BUDGET")
            .output()
            .map(|o| o.status.code())
            .map_err(|e| e.to_string())
    };
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"command": "dims", "surprise": true}"#).unwrap();
    ensure(code(&bad)? == Some(2), || "unknown field did not exit with 2".into())?;
    let missing = configs_dir().join("ap_construct_odds.json");
    ensure(code(&missing)? == Some(3), || "RunNotFound did not exit with 3".into())?;
    Ok(format!("{} configs deterministic and round-trip; exit codes 2/3 checked", files.len()))
}

fn main() {
    let criteria: [(u32, &str, f64, fn() -> Check); 10] = [
        (1, "basic-interval count", 5.0, criterion_1),
        (2, "dimension formulas", 1.0, criterion_2),
        (3, "counting identity", 1.0, criterion_3),
        (4, "constructive progression + search", 30.0, criterion_4),
        (5, "negative control", 60.0, criterion_5),
        (6, "cube-reciprocal fixture", 10.0, criterion_6),
        (7, "Fourier product vs direct sum", 30.0, criterion_7),
        (8, "Fourier non-decay", 10.0, criterion_8),
        (9, "covering count from progressions", 5.0, criterion_9),
        (10, "determinism and round trip", 30.0, criterion_10),
    ];
    let mut failed = Vec::new();
    for (n, title, limit, f) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f))
            .unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        let outcome = match outcome {
            Ok(_) if secs > limit => Err(format!("took {secs:.2} s, limit {limit} s")),
            other => other,
        };
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!("criterion {n:>2} {tag}  {title} [{secs:.2} s]: {detail}");
        if outcome.is_err() {
            failed.push(n);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria pass");
    } else {
        println!("acceptance: failing criteria {failed:?}");
        std::process::exit(1);
    }
}
