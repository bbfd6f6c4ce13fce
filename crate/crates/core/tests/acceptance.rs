use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use ncc_cq::channel::{
    cq_mutual_information, example2_channel, example2_noisy, example2_rho, example2_sigma, CqBlock, CqState,
    InputDistribution, SplitInputDistribution,
};
use ncc_cq::classical::{simulate, ClassicalDecoder, ClassicalIcInstance, InstanceParams, InterferenceCoding};
use ncc_cq::codes::{coset_sum, select_typical, NestedCosetCode};
use ncc_cq::field::PrimeField;
use ncc_cq::linalg::{spectrum_entropy, von_neumann_entropy, CMatrix, DensityOperator, LogBase, C64};
use ncc_cq::povm::{build_ptp_povm, build_rx1_povm, ptp_ensemble_error, verify_pinching, Povm, PtpEnsembleConfig, Rx1Setup};
use ncc_cq::region::{
    conv, example_separation_witness, hb, interference_free_tau, theorem1_region, theorem2_bounds, theorem3_region,
    usb_region, NccRateParams, SeparationExample,
};
use ncc_cq::typicality::Typicality;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took < limit, format!("runtime {took:?} exceeds {limit:?}"))
}

fn s_bits(rho: &DensityOperator) -> f64 {
    von_neumann_entropy(rho, LogBase::Bits).unwrap()
}

fn h2(p: f64) -> f64 {
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

fn entropy_identities() -> Outcome {
    let target = h2(1.0 / 3.0);
    let s0 = s_bits(&example2_sigma(0));
    let s1 = s_bits(&example2_sigma(1));
    ensure((s0 - target).abs() < 1e-9, format!("S(sigma0) = {s0}, want {target}"))?;
    ensure((s1 - target).abs() < 1e-9, format!("S(sigma1) = {s1}, want {target}"))?;
    let r = 2f64.sqrt() / 12.0;
    let oracle = spectrum_entropy(&[0.5 + r, 0.5 - r], LogBase::Bits).unwrap();
    let direct = s_bits(&example2_rho(0.5).unwrap());
    ensure((oracle - direct).abs() < 1e-9, format!("S(rho(0.5)) = {direct}, eigen oracle {oracle}"))?;
    Ok(format!("S(sigma) = {s0:.12}, S(rho(0.5)) = {direct:.12}"))
}

fn example2_separation() -> Outcome {
    let start = Instant::now();
    let mut detail = Vec::new();
    for (d1, d) in [(0.01, 0.1), (0.05, 0.2)] {
        let tau = interference_free_tau(d1, d).unwrap();
        ensure((conv(tau, d1).unwrap() - d).abs() < 1e-12, "conv(tau, delta1) != delta")?;
        let s = |p: f64| s_bits(&example2_rho(p).unwrap());
        let lhs = s(conv(tau, d1).unwrap()) + s(0.5);
        ensure(lhs > 2.0 * s(d), format!("entropy condition fails at ({d1}, {d})"))?;
        ensure(s(0.5) > s(d), "reduced condition fails")?;
        let ch = example2_channel(d1, d).unwrap();
        let dist =
            InputDistribution::identity_aux(PrimeField::binary(), vec![1.0 - tau, tau], &[0.5, 0.5], &[0.5, 0.5]).unwrap();
        let region = theorem1_region(&ch, &dist).unwrap();
        let triple = [s(d) - s(d1), s(0.5) - s(d), s(0.5) - s(d)];
        let slack = region.min_slack(&triple);
        ensure(slack >= -1e-9, format!("triple violates region by {slack}"))?;
        let rep = example_separation_witness(SeparationExample::QuantumEx2, d1, d, tau).unwrap();
        ensure(rep.separation, "witness reports no separation")?;
        detail.push(format!("({d1}, {d}) slack {slack:.2e}"));
    }
    within(Duration::from_secs(1), start)?;
    Ok(detail.join(", "))
}

fn example1_separation() -> Outcome {
    let start = Instant::now();
    let (d1, d) = (0.01, 0.1);
    let tau = interference_free_tau(d1, d).unwrap();
    ensure((tau - 0.0918).abs() < 1e-3, format!("tau = {tau}"))?;
    let lhs = h2(conv(d1, tau).unwrap()) - h2(d1) + 2.0 * (1.0 - h2(d));
    let rhs = 1.0 - h2(d1);
    let margin = lhs - rhs;
    ensure(margin > 0.4, format!("margin {margin} <= 0.4"))?;
    ensure((hb(d1).unwrap() - h2(d1)).abs() < 1e-12, "hb disagrees with oracle")?;
    let mixed = conv(tau, d).unwrap();
    within(Duration::from_secs(1), start)?;
    ensure(
        mixed < d,
        format!("margin {margin:.4} bits holds, but conv(tau, delta) = {mixed:.4} is not below delta = {d}"),
    )?;
    Ok(format!("margin {margin:.4} bits, conv(tau, delta) = {mixed:.4}"))
}

fn random_pmf(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..len).map(|_| rng.gen_range(0.01..1.0)).collect();
    let t: f64 = w.iter().sum();
    w.iter().map(|x| x / t).collect()
}

fn usb_recovery() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let ch = example2_channel(0.05, 0.2).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let table = |rng: &mut ChaCha8Rng| -> Vec<Vec<Vec<f64>>> {
            let flat = random_pmf(rng, 8);
            (0..2).map(|u| (0..2).map(|v| flat[4 * u + 2 * v..4 * u + 2 * v + 2].to_vec()).collect()).collect()
        };
        let p_x1 = random_pmf(&mut rng, 2);
        let dist = SplitInputDistribution::new(PrimeField::binary(), p_x1, table(&mut rng), table(&mut rng))
            .unwrap()
            .with_trivial_w();
        let t3 = theorem3_region(&ch, &dist).unwrap();
        let usb = usb_region(&ch, [&dist.p_x(1), &dist.p_x(2), &dist.p_x(3)]).unwrap();
        ensure(t3.constraints.len() == usb.constraints.len(), "constraint counts differ")?;
        for a in &t3.constraints {
            let b = usb
                .constraints
                .iter()
                .find(|b| b.coefficients == a.coefficients)
                .ok_or_else(|| format!("no usb constraint with coefficients {:?}", a.coefficients))?;
            worst = worst.max((a.rhs - b.rhs).abs());
        }
    }
    ensure(worst < 1e-9, format!("max rhs difference {worst}"))?;
    Ok(format!("20 distributions, max rhs difference {worst:.2e}"))
}

fn random_qubit(rng: &mut ChaCha8Rng) -> DensityOperator {
    let a = CMatrix::from_fn(2, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let m = a.matmul(&a.adjoint());
    let t = m.trace().re;
    DensityOperator::new(m.scale(1.0 / t)).unwrap()
}

fn check_povm(p: &Povm, worst: &mut (f64, f64)) -> Result<(), String> {
    let c = p.check().map_err(|e| e.to_string())?;
    worst.0 = worst.0.min(c.min_eigenvalue);
    worst.1 = worst.1.max(c.completeness_residual);
    ensure(c.min_eigenvalue >= -1e-9, format!("min eigenvalue {}", c.min_eigenvalue))?;
    ensure(c.completeness_residual <= 1e-8, format!("completeness residual {}", c.completeness_residual))
}

fn povm_validity() -> Outcome {
    let start = Instant::now();
    let f2 = PrimeField::binary();
    let rule = Typicality::entropy(0.2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = (f64::INFINITY, 0.0f64);
    let mut built = 0;
    for _ in 0..50 {
        let n = rng.gen_range(1..=4);
        let k = rng.gen_range(0..=n);
        let l = rng.gen_range(0..=n - k);
        let p_v = random_pmf(&mut rng, 2);
        let states = vec![random_qubit(&mut rng), random_qubit(&mut rng)];
        let code = NestedCosetCode::random(f2, n, k, l, &mut rng);
        let enc = select_typical(&code, &p_v, rule, &mut rng).unwrap();
        check_povm(&build_ptp_povm(&code, &enc, &states, rule).unwrap(), &mut worst)?;
        built += 1;

        let d1 = rng.gen_range(0.01..0.45);
        let d = rng.gen_range(0.01..0.45);
        let ch = example2_channel(d1, d).unwrap();
        let dist = InputDistribution::identity_aux(f2, random_pmf(&mut rng, 2), &p_v, &p_v).unwrap();
        let code3 = code.with_dither(f2.random_vec(n, &mut rng)).unwrap();
        let enc2 = select_typical(&code, &p_v, rule, &mut rng).unwrap();
        let enc3 = select_typical(&code3, &p_v, rule, &mut rng).unwrap();
        let book: Vec<Vec<usize>> = (0..2).map(|_| (0..n).map(|_| rng.gen_range(0..2)).collect()).collect();
        let setup = Rx1Setup {
            channel: &ch,
            dist: &dist,
            codebook: &book,
            encoder2: &enc2,
            encoder3: &enc3,
            rule,
        };
        check_povm(build_rx1_povm(&setup).unwrap().povm(), &mut worst)?;
        built += 1;
    }
    within(Duration::from_secs(120), start)?;
    Ok(format!("{built} POVMs, min eigenvalue {:.2e}, max residual {:.2e}", worst.0, worst.1))
}

fn pinching_convergence() -> Outcome {
    let start = Instant::now();
    let states = vec![example2_noisy(0, 0.2), example2_noisy(1, 0.2)];
    let p_ab = vec![vec![0.5, 0.0], vec![0.0, 0.5]];
    let table = verify_pinching(&p_ab, &states, &[2, 4, 6, 8], Typicality::entropy(0.2).unwrap()).unwrap();
    let gaps: Vec<String> = table.rows.iter().map(|r| format!("{:.4}", r.one_minus_trace)).collect();
    within(Duration::from_secs(300), start)?;
    ensure(table.strictly_decreasing, format!("1 - trace = [{}]", gaps.join(", ")))?;
    Ok(format!("1 - trace = [{}]", gaps.join(", ")))
}

fn decoder_trend() -> Outcome {
    let f2 = PrimeField::binary();
    let p_v = vec![0.75, 0.25];
    let rule = Typicality::entropy(0.2).unwrap();
    let states = vec![DensityOperator::basis(2, 0), DensityOperator::basis(2, 1)];
    let run = |n: usize, k: usize, l: usize| -> Result<(f64, bool, f64, f64), String> {
        let params = NccRateParams::new(f2, n, k, l, p_v.clone()).map_err(|e| e.to_string())?;
        let bounds = theorem2_bounds(&params, &states).map_err(|e| e.to_string())?;
        let cfg = PtpEnsembleConfig {
            field: f2,
            n,
            k,
            l,
            p_v: p_v.clone(),
            rule,
            codes: 200,
            seed: 0,
        };
        let err = ptp_ensemble_error(&cfg, &states).map_err(|e| e.to_string())?.mean_error;
        Ok((err, bounds.in_window(), bounds.message_rate, bounds.holevo))
    };
    let mut errs = Vec::new();
    for (n, k, l) in [(2, 1, 0), (4, 2, 1), (6, 3, 2)] {
        let (e, inside, _, _) = run(n, k, l)?;
        ensure(inside, format!("({n},{k},{l}) is outside the rate window"))?;
        errs.push(e);
    }
    let (above, _, rate, chi) = run(6, 3, 5)?;
    ensure(rate > chi, format!("message rate {rate} is not above chi {chi}"))?;
    let shown = format!("in-window errors {errs:.4?}, above chi {above:.4}");
    ensure(errs.windows(2).all(|w| w[1] < w[0]), format!("not decreasing: {shown}"))?;
    ensure(above > errs[2], format!("above-chi error not larger: {shown}"))?;
    Ok(shown)
}

fn all_generators(field: PrimeField, n: usize, rows: usize) -> Vec<Vec<Vec<u32>>> {
    let total = field.space_size(n * rows) as u64;
    (0..total)
        .map(|idx| {
            let flat = field.vector_from_index(idx, n * rows);
            flat.chunks(n.max(1)).take(rows).map(|c| c.to_vec()).collect()
        })
        .collect()
}

fn closure_holds(a: &NestedCosetCode, b: &NestedCosetCode) -> Result<(), String> {
    let f = a.field();
    let sum = coset_sum(a, b).map_err(|e| e.to_string())?;
    let budget = 1u128 << 20;
    let ea = a.enumerate(budget).map_err(|e| e.to_string())?;
    let eb = b.enumerate(budget).map_err(|e| e.to_string())?;
    let es = sum.enumerate(budget).map_err(|e| e.to_string())?;
    let range: BTreeSet<Vec<u32>> = es.iter().flatten().cloned().collect();
    let mut sums = BTreeSet::new();
    for (ma, coset_a) in ea.iter().enumerate() {
        for (mb, coset_b) in eb.iter().enumerate() {
            let m = f.add_vec(&a.message(ma as u64), &b.message(mb as u64));
            let target: BTreeSet<&Vec<u32>> = es[f.index_of(&m) as usize].iter().collect();
            for x in coset_a {
                for y in coset_b {
                    let z = f.add_vec(x, y);
                    ensure(target.contains(&z), format!("{x:?} + {y:?} leaves coset {m:?}"))?;
                    sums.insert(z);
                }
            }
        }
    }
    ensure(sums == range, "pairwise sums differ from the sum code's range")
}

fn coset_closure() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut exhaustive = 0usize;
    let mut sampled = 0usize;
    for q in [2, 3] {
        let f = PrimeField::new(q).unwrap();
        for n in 1..=4 {
            for k in 0..=2 {
                for l in 0..=2 {
                    let count = f.space_size(n * (k + l));
                    if count <= 4096 {
                        for gi in all_generators(f, n, k) {
                            for go in all_generators(f, n, l) {
                                let a = NestedCosetCode::from_rows(f, n, &gi, &go, f.random_vec(n, &mut rng)).unwrap();
                                let b = a.with_dither(f.random_vec(n, &mut rng)).unwrap();
                                closure_holds(&a, &b)?;
                                exhaustive += 1;
                            }
                        }
                    } else {
                        for _ in 0..256 {
                            let a = NestedCosetCode::random(f, n, k, l, &mut rng);
                            let b = a.with_dither(f.random_vec(n, &mut rng)).unwrap();
                            closure_holds(&a, &b)?;
                            sampled += 1;
                        }
                    }
                }
            }
        }
    }
    Ok(format!("{exhaustive} generator pairs enumerated, {sampled} sampled"))
}

fn classical_ordering() -> Outcome {
    let run = |coding: InterferenceCoding| {
        let params = InstanceParams {
            n: 16,
            delta1: 0.05,
            delta: 0.1,
            tau: 0.1,
            m1_size: 4,
            k: 1,
            l: 4,
            coding,
            encoder_rule: Typicality::strong(0.5).unwrap(),
            cost_slack: 0.1,
        };
        let inst = ClassicalIcInstance::random(params, &mut ChaCha8Rng::seed_from_u64(2024)).unwrap();
        simulate(
            &inst,
            10_000,
            2024,
            ClassicalDecoder::JointTypicality,
            Typicality::entropy(0.25).unwrap(),
            1 << 24,
        )
        .unwrap()
        .receivers[0]
            .clone()
    };
    let shared = run(InterferenceCoding::SharedCoset);
    let indep = run(InterferenceCoding::Independent);
    let shown = format!(
        "shared {:.4} [{:.4}, {:.4}], independent {:.4} [{:.4}, {:.4}]",
        shared.rate, shared.wilson_low, shared.wilson_high, indep.rate, indep.wilson_low, indep.wilson_high
    );
    ensure(shared.wilson_high < indep.wilson_low, format!("intervals overlap: {shown}"))?;
    Ok(shown)
}

fn degenerate_reduction() -> Outcome {
    let (d1, d) = (0.05, 0.2);
    let ch = example2_channel(d1, d).unwrap();
    let p_x1 = vec![0.6, 0.4];
    let dist = InputDistribution::identity_aux(PrimeField::binary(), p_x1.clone(), &[1.0, 0.0], &[1.0, 0.0]).unwrap();
    let region = theorem1_region(&ch, &dist).unwrap();
    let y1 = ch.reduced_states(&[0]).unwrap();
    let blocks = (0..2)
        .map(|x1| CqBlock {
            label: vec![x1],
            prob: p_x1[x1],
            state: y1[ch.input_index([x1, 0, 0])].clone(),
        })
        .collect();
    let oracle = cq_mutual_information(&CqState::new(vec![2], vec![2], blocks).unwrap(), &[0], &[]).unwrap();
    let (best, corner) = region.max_weighted_sum([1.0, 0.0, 0.0]);
    ensure((best - oracle).abs() < 1e-9, format!("max R1 {best} vs I(Y1;X1) {oracle}"))?;
    ensure(corner[1].abs() < 1e-12 && corner[2].abs() < 1e-12, "R2, R3 not collapsed")?;
    let others = region.max_weighted_sum([0.0, 1.0, 1.0]).0;
    ensure(others.abs() < 1e-9, format!("R2 + R3 can reach {others}"))?;
    Ok(format!("max R1 = {best:.12}, I(Y1;X1) = {oracle:.12}"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("entropy identities", entropy_identities),
        ("quantum separation example", example2_separation),
        ("classical separation example", example1_separation),
        ("usb recovery", usb_recovery),
        ("povm validity", povm_validity),
        ("pinching convergence", pinching_convergence),
        ("decoder trend", decoder_trend),
        ("coset closure", coset_closure),
        ("classical simulator ordering", classical_ordering),
        ("degenerate reduction", degenerate_reduction),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let took = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name} ({took:.2}s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({took:.2}s): {detail}", i + 1);
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
