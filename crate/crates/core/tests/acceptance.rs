//! Acceptance suite: runs each criterion once, prints one PASS/FAIL line per
//! criterion and exits nonzero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use ppdio::bounds::{decomposition_params, rho_d, rho_d_closed_form, rho_mt};
use ppdio::exp_sums::{cancellation_slope, write_csv};
use ppdio::experiments::{discrepancy, dyadic_grid, theorem_check, ExperimentRun, Experiments};
use ppdio::fourier_smoothing::{montgomery_check, vaaler_check, vaaler_coefficients};
use ppdio::{Precision, PseudoPolynomial, Real, RunConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::float::Constant;
use rug::ops::Pow;
use rug::{Float, Integer, Rational};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn poly(s: &str) -> PseudoPolynomial {
    s.parse().expect("valid pseudo-polynomial")
}

fn engine() -> Experiments {
    Experiments::new(&RunConfig::default()).expect("default config is valid")
}

fn exponents() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        let den: u32 = rng.gen_range(1..=1000);
        let num: u32 = rng.gen_range(3 * den + 1..20 * den);
        let c = Rational::from((num, den));
        let expected = (Rational::from(24) * &c * &c + Rational::from(36) * &c + 30u32).recip();
        let via_rho = rho_d(&Real::from_rational(c.clone())).map_err(|e| e.to_string())?;
        let closed = rho_d_closed_form(&Real::from_rational(c.clone())).map_err(|e| e.to_string())?;
        ensure(via_rho.exact() == Some(&expected), format!("rho_d({c}) mismatch"))?;
        ensure(closed.exact() == Some(&expected), format!("closed form at {c} mismatch"))?;
    }
    // 1/(2(2^{ceil c + 1} - 1)) and 1/(4^{k-1}(k+2)) at 256 bits
    let p = 256;
    let cases = [
        (Rational::from((7, 2)), 1, Float::with_val(p, 1) / (Float::with_val(p, 2) * (Float::with_val(p, 2).pow(5u32) - 1u32))),
        (Rational::from((5, 2)), 4, Float::with_val(p, 1) / (Float::with_val(p, 4).pow(3u32) * 6u32)),
    ];
    for (c, k, oracle) in cases {
        let got = rho_mt(&c, k).map_err(|e| e.to_string())?;
        let diff = Float::with_val(p, &got - &oracle).abs();
        ensure(diff < Float::with_val(p, Float::i_exp(1, -250)), format!("rho_MT({c},{k}) = {got} vs {oracle}"))?;
    }
    Ok("100 rational c agree exactly; rho_MT(3.5,1)=1/62, rho_MT(2.5,4)=1/384".into())
}

fn vaaler() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = f64::NEG_INFINITY;
    for i in 0..50 {
        let h = [4u32, 16, 64][i % 3];
        let a: f64 = rng.gen_range(0.0..1.0);
        let b = a + rng.gen_range(0.0..=1.0);
        let approx = vaaler_coefficients((a, b), h).map_err(|e| e.to_string())?;
        for k in -(h as i64)..=(h as i64) {
            let bound = 1.0 / (k.unsigned_abs() as f64 + 1.0);
            ensure(
                approx.coefficient(k).norm() <= bound,
                format!("|c_{k}| exceeds bound for ({a}, {b}), H={h}"),
            )?;
        }
        let v = vaaler_check((a, b), h, 10_000).map_err(|e| e.to_string())?;
        worst = worst.max(v);
        ensure(v <= 1e-12, format!("violation {v:e} for ({a}, {b}), H={h}"))?;
    }
    Ok(format!("50 instances, max violation {worst:.3e}"))
}

fn montgomery() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (n, m) = (1000usize, 50u32);
    let mut min_margin = f64::INFINITY;
    for _ in 0..100 {
        let xs: Vec<f64> = (0..n)
            .map(|_| {
                let d = rng.gen_range(1.0 / f64::from(m)..=0.5);
                let k: i32 = rng.gen_range(-3..=3);
                f64::from(k) + if rng.gen() { d } else { -d }
            })
            .collect();
        let c = montgomery_check(&xs, m);
        ensure(c.hypothesis_ok, "generated instance violates the hypothesis")?;
        ensure(c.holds, format!("lhs {} <= {}", c.lhs, c.threshold))?;
        min_margin = min_margin.min(c.lhs / c.threshold);
    }
    Ok(format!("100 instances, min lhs/(N/6) = {min_margin:.2}"))
}

#[derive(Clone, Copy)]
enum Coef {
    Rat(u32, u32),
    Sqrt(u32, u32, u32),
    Pi(u32, u32),
    Golden,
}

#[derive(Clone, Copy)]
enum Expo {
    Rat(u32, u32),
    Sqrt(u32),
}

fn random_term(rng: &mut ChaCha8Rng, force_fractional: bool) -> (Coef, Expo) {
    let coef = match rng.gen_range(0..4) {
        0 => Coef::Rat(rng.gen_range(1..50), rng.gen_range(1..20)),
        1 => Coef::Sqrt([2, 3, 5, 6, 7, 10, 11][rng.gen_range(0..7)], rng.gen_range(1..10), rng.gen_range(1..10)),
        2 => Coef::Pi(rng.gen_range(1..10), rng.gen_range(1..10)),
        _ => Coef::Golden,
    };
    let expo = loop {
        let e = if rng.gen_range(0..5) == 0 {
            Expo::Sqrt([2, 3, 5, 6, 7, 8, 10, 11, 12, 13][rng.gen_range(0..10)])
        } else {
            let q = [1, 2, 3, 4, 5, 7, 10][rng.gen_range(0..7)];
            Expo::Rat(rng.gen_range(q..=5 * q + q / 2), q)
        };
        let integral = matches!(e, Expo::Rat(p, q) if p % q == 0);
        if !(force_fractional && integral) {
            break e;
        }
    };
    (coef, expo)
}

fn describe(terms: &[(Coef, Expo)]) -> String {
    terms
        .iter()
        .map(|(c, e)| {
            let c = match *c {
                Coef::Rat(p, q) => format!("{p}/{q}"),
                Coef::Sqrt(k, p, q) => format!("{p}/{q}*sqrt({k})"),
                Coef::Pi(p, q) => format!("{p}/{q}*pi"),
                Coef::Golden => "golden".into(),
            };
            let e = match *e {
                Expo::Rat(p, q) => format!("{p}/{q}"),
                Expo::Sqrt(k) => format!("sqrt({k})"),
            };
            format!("({c})*x^({e})")
        })
        .collect::<Vec<_>>()
        .join("+")
}

/// Floor of `f(n)` via MPFR `pow`, or `None` if undecided at `prec` bits.
fn oracle_floor(terms: &[(Coef, Expo)], n: u64, prec: u32) -> Option<Integer> {
    let fl = |v: u32| Float::with_val(prec, v);
    let mut total = Float::with_val(prec, 0);
    for (c, e) in terms {
        let coef = match *c {
            Coef::Rat(p, q) => fl(p) / fl(q),
            Coef::Sqrt(k, p, q) => fl(p) / fl(q) * fl(k).sqrt(),
            Coef::Pi(p, q) => fl(p) / fl(q) * Float::with_val(prec, Constant::Pi),
            Coef::Golden => (fl(5).sqrt() + 1u32) / 2u32,
        };
        let expo = match *e {
            Expo::Rat(p, q) => fl(p) / fl(q),
            Expo::Sqrt(k) => fl(k).sqrt(),
        };
        total += coef * Float::with_val(prec, n).pow(expo);
    }
    let floor = total.clone().floor();
    let frac = Float::with_val(prec, &total - &floor);
    let margin = Float::with_val(prec, Float::i_exp(1, -(prec as i32) / 2));
    let one_minus = Float::with_val(prec, 1u32 - &margin);
    (frac > margin && frac < one_minus).then(|| floor.to_integer().expect("finite"))
}

fn floor_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let precision = Precision::default();
    let mut undecided = 0;
    for i in 0..10_000 {
        let count = rng.gen_range(1..=3);
        let terms: Vec<(Coef, Expo)> = (0..count).map(|j| random_term(&mut rng, j == 0)).collect();
        let text = describe(&terms);
        let f: PseudoPolynomial = text.parse().map_err(|e| format!("{text}: {e}"))?;
        let n: u64 = rng.gen_range(1..=1_000_000);
        let got = f.floor_certified(n, &precision).map_err(|e| format!("case {i} {text} at {n}: {e}"))?;
        let magnitude = f.log2_estimate(n).max(0.0).ceil() as u32;
        let prec = 4 * (precision.start_bits.max(magnitude + 96));
        match oracle_floor(&terms, n, prec) {
            Some(want) => ensure(got == want, format!("case {i} {text} at {n}: {got} vs oracle {want}"))?,
            None => undecided += 1,
        }
    }
    ensure(undecided == 0, format!("oracle undecided on {undecided} cases"))?;
    Ok("10000 random floors match the oracle, no ambiguous floors".into())
}

fn min_search_run() -> Result<ExperimentRun, String> {
    let xi: Real = "sqrt2".parse().expect("valid constant");
    engine()
        .min_search(&poly("x^3.5+x"), &xi, &dyadic_grid(1 << 10, 1 << 20))
        .map_err(|e| e.to_string())
}

fn theorem_desk_check() -> Outcome {
    let run = min_search_run()?;
    let rd = 1.0 / 450.0;
    let flags = theorem_check(&run, rd).map_err(|e| e.to_string())?;
    if let Some(bad) = flags.iter().find(|f| !f.holds) {
        return Err(format!("m({}) = {} exceeds {}", bad.x, bad.m_value, bad.bound));
    }
    let fit = run.fit.as_ref().ok_or("no decay fit (too few positive values)")?;
    ensure(fit.slope <= -rd, format!("decay slope {} > -1/450", fit.slope))?;
    Ok(format!("{} grid points hold, decay slope {:.4}", flags.len(), fit.slope))
}

fn cancellation() -> Outcome {
    let grid = dyadic_grid(1 << 10, 1 << 20);
    let (fit, _) = cancellation_slope(&poly("x^3.5"), &Real::from_integer(1), &grid).map_err(|e| e.to_string())?;
    let limit = 1.0 - 1.0 / 150.0 + 0.05;
    ensure(fit.slope <= limit, format!("slope {} > {limit}", fit.slope))?;
    Ok(format!("slope {:.4} (limit {limit:.4})", fit.slope))
}

fn divisibility_run() -> Result<ExperimentRun, String> {
    let ms: Vec<u64> = (2..=200).collect();
    engine()
        .divisibility_run(&poly("x^3.5+x"), &ms, 1_000_000)
        .map_err(|e| e.to_string())
}

fn divisibility() -> Outcome {
    let run = divisibility_run()?;
    if let Some(r) = run.rows.iter().find(|r| r.witness.is_none()) {
        return Err(format!("no witness for m = {} below 10^6", r.x));
    }
    let (m, p) = run
        .rows
        .iter()
        .map(|r| (r.x, r.witness.expect("checked")))
        .max_by_key(|&(_, p)| p)
        .expect("nonempty");
    Ok(format!("all m in [2,200] witnessed; max witness p = {p} (m = {m})"))
}

fn decomposition() -> Outcome {
    let params = decomposition_params(1_000_000, 1.0 / 150.0).map_err(|e| e.to_string())?;
    let p = 256;
    let y = Float::with_val(p, 1_000_000u32);
    let rho = Float::with_val(p, 1) / 150u32;
    let u = Float::with_val(p, (&y).pow(Float::with_val(p, &rho * 2u32)));
    let v = Float::with_val(p, y.clone().cbrt() * 4u32);
    let z = Float::with_val(p, (&y).pow(Float::with_val(p, 0.5 - rho.clone())) / 9u32).floor() + 0.5;
    let u_min = u >= 3 && u < v && v < z && z < y;
    let v_vs_x = Float::with_val(p, (&v).pow(3u32)) >= Float::with_val(p, &y * 32u32);
    ensure((params.u - u.to_f64()).abs() < 1e-12, format!("U = {} vs {}", params.u, u))?;
    ensure((params.u - 1.20).abs() < 0.005, format!("U = {} is not ~1.20", params.u))?;
    ensure(!params.constraints.u_min && !u_min, "U >= 3 flag should be false")?;
    ensure(params.constraints.v_vs_x && v_vs_x, "V^3 >= 32X flag should be true")?;
    Ok(format!("U = {:.4}, U_min = false, V^3 >= 32X = true", params.u))
}

fn equidistribution() -> Outcome {
    let parts = engine()
        .fractional_parts(&poly("x^3.5"), 100_000)
        .map_err(|e| e.to_string())?;
    let d = discrepancy(&parts).map_err(|e| e.to_string())?;
    ensure(d <= 0.05, format!("D* = {d}"))?;
    Ok(format!("D* = {d:.5} over {} primes", parts.len()))
}

fn csv_outputs() -> Result<Vec<Vec<u8>>, String> {
    let mut out = Vec::new();
    for run in [min_search_run()?, divisibility_run()?] {
        let mut buf = Vec::new();
        run.write_csv(&mut buf).map_err(|e| e.to_string())?;
        out.push(buf);
    }
    let grid = dyadic_grid(1 << 10, 1 << 20);
    let (_, recs) = cancellation_slope(&poly("x^3.5"), &Real::from_integer(1), &grid).map_err(|e| e.to_string())?;
    let mut buf = Vec::new();
    write_csv(&recs, Some(1.0 - 1.0 / 150.0), &mut buf).map_err(|e| e.to_string())?;
    out.push(buf);
    Ok(out)
}

fn determinism() -> Outcome {
    let base = csv_outputs()?;
    let again = csv_outputs()?;
    ensure(base == again, "repeat run differs")?;
    for threads in [1, 3] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| e.to_string())?;
        let other = pool.install(csv_outputs)?;
        ensure(base == other, format!("output differs with {threads} thread(s)"))?;
    }
    Ok("criteria 5-7 CSV byte-identical across repeats and 1/3/default threads".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome, Duration); 10] = [
        ("exponent reproduction", exponents, Duration::from_secs(1)),
        ("Vaaler suite", vaaler, Duration::from_secs(5)),
        ("Montgomery suite", montgomery, Duration::from_secs(5)),
        ("certified floor oracle", floor_oracle, Duration::from_secs(60)),
        ("minimum fractional part desk check", theorem_desk_check, Duration::from_secs(120)),
        ("prime sum cancellation", cancellation, Duration::from_secs(120)),
        ("divisibility witnesses", divisibility, Duration::from_secs(60)),
        ("decomposition parameters", decomposition, Duration::from_secs(1)),
        ("equidistribution", equidistribution, Duration::from_secs(30)),
        ("determinism", determinism, Duration::MAX),
    ];
    let mut failures = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > *budget => Err(format!("{detail}; took {elapsed:.2?}, budget {budget:?}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{elapsed:.2?}]", i + 1),
            Err(why) => {
                failures += 1;
                println!("criterion {:>2} FAIL  {name}: {why} [{elapsed:.2?}]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
