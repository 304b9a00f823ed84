//! Acceptance criteria, one line each. Quantities are recomputed here from
//! eigenvectors with dense, deliberately naive formulas and compared against
//! the library.

use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use nonthermal::diagnostics::{effective_dimension, equilibration_coefficient, von_neumann_entropy};
use nonthermal::experiments::{run_sweep, write_aggregate_csv, write_records_csv, metadata_json, ExperimentPlan, SweepOutput};
use nonthermal::hilbert::DensityOperator;
use nonthermal::model::{build_hamiltonian, sample_spec, SpinChainSpec};
use nonthermal::spectral::{dephase, diagonalize, overlaps, SpectralData};
use nonthermal::hilbert::PureState;

type M = DMatrix<C64>;

struct Outcome {
    id: &'static str,
    passed: bool,
    soft: bool,
    summary: String,
}

fn outcome(id: &'static str, passed: bool, summary: String) -> Outcome {
    Outcome { id, passed, soft: false, summary }
}

// ---- oracles -------------------------------------------------------------

fn sample(n: usize, seed: u64) -> (SpinChainSpec, M, SpectralData) {
    let spec = sample_spec(n, 1.0, 0.4, seed).unwrap();
    let h = build_hamiltonian(&spec).unwrap().full;
    let sd = diagonalize(&h).unwrap();
    (spec, h, sd)
}

fn column(sd: &SpectralData, k: usize) -> Vec<C64> {
    sd.eigenvectors().column(k).iter().copied().collect()
}

fn overlaps_naive(sd: &SpectralData, psi: &[C64]) -> Vec<C64> {
    (0..sd.dim())
        .map(|k| column(sd, k).iter().zip(psi).map(|(v, p)| v.conj() * p).sum())
        .collect()
}

/// Groups eigenvalue indices whose neighbours lie within `tol`.
fn level_groups(e: &[f64], tol: f64) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = vec![vec![0]];
    for k in 1..e.len() {
        if e[k] - e[k - 1] <= tol {
            groups.last_mut().unwrap().push(k);
        } else {
            groups.push(vec![k]);
        }
    }
    groups
}

fn projector(vecs: &M, group: &[usize]) -> M {
    let d = vecs.nrows();
    let mut p = M::zeros(d, d);
    for &k in group {
        let v = vecs.column(k);
        p += v * v.adjoint();
    }
    p
}

fn pinch_naive(vecs: &M, e: &[f64], tol: f64, rho: &M) -> M {
    let d = rho.nrows();
    let mut out = M::zeros(d, d);
    for g in level_groups(e, tol) {
        let p = projector(vecs, &g);
        out += &p * rho * &p;
    }
    out
}

/// Pinching of a pure state: Σ_g (P_g ψ)(P_g ψ)†.
fn pinch_pure_naive(sd: &SpectralData, psi: &[C64]) -> M {
    let vecs = sd.eigenvectors();
    let c = overlaps_naive(sd, psi);
    let d = psi.len();
    let mut out = M::zeros(d, d);
    for g in level_groups(sd.eigenvalues(), sd.degeneracy_tolerance()) {
        let mut u = vec![C64::new(0.0, 0.0); d];
        for &k in &g {
            for (i, x) in u.iter_mut().enumerate() {
                *x += vecs[(i, k)] * c[k];
            }
        }
        out += outer(&u);
    }
    out
}

fn outer(psi: &[C64]) -> M {
    M::from_fn(psi.len(), psi.len(), |i, j| psi[i] * psi[j].conj())
}

/// Reduced state of site 1 (bit 0) from a full density matrix.
fn site1_from_matrix(rho: &M) -> [[C64; 2]; 2] {
    let mut r = [[C64::new(0.0, 0.0); 2]; 2];
    for b in (0..rho.nrows()).step_by(2) {
        for s in 0..2 {
            for t in 0..2 {
                r[s][t] += rho[(b | s, b | t)];
            }
        }
    }
    r
}

fn site1_from_vector(psi: &[C64]) -> [[C64; 2]; 2] {
    let mut r = [[C64::new(0.0, 0.0); 2]; 2];
    for b in (0..psi.len()).step_by(2) {
        for s in 0..2 {
            for t in 0..2 {
                r[s][t] += psi[b | s] * psi[b | t].conj();
            }
        }
    }
    r
}

/// Closed-form qubit trace distance.
fn qubit_distance(a: &[[C64; 2]; 2], b: &[[C64; 2]; 2]) -> f64 {
    let d00 = (a[0][0] - b[0][0]).re;
    let d11 = (a[1][1] - b[1][1]).re;
    let d01 = a[0][1] - b[0][1];
    (((d00 - d11) / 2.0).powi(2) + d01.norm_sqr()).sqrt()
}

fn basis_qubit(i: usize) -> [[C64; 2]; 2] {
    let mut r = [[C64::new(0.0, 0.0); 2]; 2];
    r[i][i] = C64::new(1.0, 0.0);
    r
}

fn evolve_naive(sd: &SpectralData, c: &[C64], t: f64) -> Vec<C64> {
    let vecs = sd.eigenvectors();
    let mut psi = vec![C64::new(0.0, 0.0); sd.dim()];
    for (k, ck) in c.iter().enumerate() {
        let phase = C64::from_polar(1.0, -sd.eigenvalues()[k] * t) * ck;
        for (i, p) in psi.iter_mut().enumerate() {
            *p += vecs[(i, k)] * phase;
        }
    }
    psi
}

fn gaussian_state(dim: usize, rng: &mut ChaCha20Rng) -> Vec<C64> {
    let v: Vec<C64> = (0..dim)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

fn to_state(psi: &[C64]) -> PureState {
    PureState::new(nalgebra::DVector::from_column_slice(psi)).unwrap()
}

fn frobenius(m: &M) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn entropy_naive(m: &M) -> f64 {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    // Hermitian → real symmetric embedding [[Re, -Im], [Im, Re]] doubles each eigenvalue
    let d = h.nrows();
    let real = DMatrix::<f64>::from_fn(2 * d, 2 * d, |i, j| {
        let z = h[(i % d, j % d)];
        match (i < d, j < d) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    let mut ev: Vec<f64> = real.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev.iter().step_by(2).map(|&x| x.max(0.0)).filter(|&x| x > 0.0).map(|x| -x * x.ln()).sum()
}

// ---- criteria ------------------------------------------------------------

fn criterion_1() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(101);
    let mut ipr_gap = 0.0f64;
    let mut purity_gap = 0.0f64;
    let samples: Vec<_> = (0..10).map(|j| sample(3 + j % 4, 1000 + j as u64)).collect();
    for j in 0..50 {
        let (_, _, sd) = &samples[j % 10];
        let psi = gaussian_state(sd.dim(), &mut rng);
        let c = overlaps_naive(sd, &psi);
        let ipr: f64 = c.iter().map(|z| z.norm_sqr().powi(2)).sum();
        let omega = pinch_naive(sd.eigenvectors(), sd.eigenvalues(), sd.degeneracy_tolerance(), &outer(&psi));
        let purity = (&omega * &omega).trace().re;
        let inv = 1.0 / effective_dimension(&overlaps(sd, &to_state(&psi)).unwrap(), sd.blocks());
        ipr_gap = ipr_gap.max((inv - ipr).abs());
        purity_gap = purity_gap.max((inv - purity).abs());
    }
    // doubly degenerate H = Q diag(λ) Q† with Q from a Gaussian QR
    let d = 16;
    let g = M::from_fn(d, d, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let q = g.qr().q();
    let mut lambda: Vec<f64> = (0..d).map(|i| i as f64 * 0.37 + 0.01 * (i * i) as f64).collect();
    lambda[5] = lambda[4];
    let h = &q * M::from_diagonal(&nalgebra::DVector::from_iterator(d, lambda.iter().map(|&x| C64::new(x, 0.0)))) * q.adjoint();
    let h = (&h + h.adjoint()) * C64::new(0.5, 0.0);
    let sd = diagonalize(&h).unwrap();
    let mut deg_gap = 0.0f64;
    let pair_block = sd.blocks().iter().filter(|b| b.len() == 2).count() == 1 && sd.blocks().len() == d - 1;
    for _ in 0..10 {
        let psi = gaussian_state(d, &mut rng);
        // exact weights from the constructed eigenbasis
        let w: Vec<f64> = (0..d)
            .map(|k| q.column(k).iter().zip(&psi).map(|(v, p)| v.conj() * p).sum::<C64>().norm_sqr())
            .collect();
        let mut brute = 0.0;
        for k in 0..d {
            for l in 0..d {
                if lambda[k] == lambda[l] {
                    brute += w[k] * w[l];
                }
            }
        }
        let omega = dephase(&sd, &to_state(&psi)).unwrap();
        let inv = 1.0 / effective_dimension(&overlaps(&sd, &to_state(&psi)).unwrap(), sd.blocks());
        deg_gap = deg_gap.max((inv - brute).abs()).max((omega.purity() - brute).abs());
    }
    outcome(
        "1 effective-dimension identities",
        ipr_gap <= 1e-12 && purity_gap <= 1e-10 && deg_gap <= 1e-10 && pair_block,
        format!(
            "50 states / 10 samples n=3..6: max|1/d_eff-IPR|={ipr_gap:.2e} (<=1e-12), max|1/d_eff-Tr w^2|={purity_gap:.2e} (<=1e-10); \
             degenerate H: gap={deg_gap:.2e}, single 2-block detected={pair_block}"
        ),
    )
}

fn criterion_2() -> Outcome {
    let n = 8;
    let mut worst = 0.0f64;
    let mut failures = 0;
    for j in 0..100u64 {
        let (_, _, sd) = sample(n, 2000 + j);
        let mut rng = ChaCha20Rng::seed_from_u64(3000 + j);
        let k = rng.random_range(0..sd.dim());
        let mut psi0 = vec![C64::new(0.0, 0.0); sd.dim()];
        psi0[k] = C64::new(1.0, 0.0);
        let c = overlaps_naive(&sd, &psi0);
        let ipr: f64 = c.iter().map(|z| z.norm_sqr().powi(2)).sum();
        let c_eq = 0.5 * (4.0 * ipr).sqrt();
        let lib = equilibration_coefficient(&overlaps(&sd, &to_state(&psi0)).unwrap(), sd.blocks(), 2);
        assert!((lib - c_eq).abs() < 1e-12, "C_eq mismatch {lib} vs {c_eq}");
        let omega = pinch_pure_naive(&sd, &psi0);
        let omega_s = site1_from_matrix(&omega);
        let mut total = 0.0;
        for _ in 0..1000 {
            let t = rng.random_range(0.0..1e4);
            total += qubit_distance(&site1_from_vector(&evolve_naive(&sd, &c, t)), &omega_s);
        }
        let ratio = total / 1000.0 / c_eq;
        worst = worst.max(ratio);
        failures += usize::from(ratio > 1.0);
    }
    outcome(
        "2 equilibration bound",
        failures == 0,
        format!("100 instances n=8, 1e3 times on [0,1e4]: {failures} violations, max <D>_t/C_eq = {worst:.4} (<=1)"),
    )
}

fn criterion_3() -> Outcome {
    let mut pairs = 0;
    let mut violations = 0;
    let mut slack = f64::INFINITY;
    for n in 3..=8usize {
        for j in 0..5u64 {
            let (_, _, sd) = sample(n, 4000 + 10 * n as u64 + j);
            let reduced: Vec<_> = (0..sd.dim()).map(|k| site1_from_vector(&column(&sd, k))).collect();
            let mut rng = ChaCha20Rng::seed_from_u64(5000 + 10 * n as u64 + j);
            let count = sd.dim().min(24);
            for _ in 0..count {
                let k = rng.random_range(0..sd.dim());
                let state = |idx: usize| {
                    let mut psi = vec![C64::new(0.0, 0.0); sd.dim()];
                    psi[idx] = C64::new(1.0, 0.0);
                    let c = overlaps_naive(&sd, &psi);
                    let s = basis_qubit(idx & 1);
                    let r: f64 = c.iter().zip(&reduced).map(|(ck, rk)| ck.norm_sqr() * qubit_distance(rk, &s)).sum();
                    let omega = pinch_pure_naive(&sd, &psi);
                    (s, r, site1_from_matrix(&omega))
                };
                let (s1, r1, w1) = state(k);
                let (s2, r2, w2) = state(k ^ 1);
                let gap = qubit_distance(&w1, &w2) - (qubit_distance(&s1, &s2) - r1 - r2);
                slack = slack.min(gap);
                violations += usize::from(gap < -1e-10);
                pairs += 1;
            }
        }
    }
    outcome(
        "3 nonthermalization inequality",
        pairs >= 500 && violations == 0,
        format!("{pairs} pairs n=3..8: {violations} violations, min D_omega-(D_init-R1-R2) = {slack:.3e} (>= -1e-10)"),
    )
}

fn criterion_4() -> Outcome {
    let n = 6;
    let mut lines = Vec::new();
    let mut all = true;
    for j in 0..5u64 {
        let (_, _, sd) = sample(n, 6000 + j);
        if !sd.is_nondegenerate() {
            lines.push(format!("sample {j} degenerate, skipped"));
            continue;
        }
        let reduced: Vec<_> = (0..sd.dim()).map(|k| site1_from_vector(&column(&sd, k))).collect();
        let delta = reduced
            .iter()
            .map(|r| qubit_distance(r, &basis_qubit(0)).min(qubit_distance(r, &basis_qubit(1))))
            .fold(0.0, f64::max);
        let bound = 2.0 * delta * 2.0;
        let mut rng = ChaCha20Rng::seed_from_u64(7000 + j);
        for i in 0..2 {
            let rs: Vec<f64> = (0..500)
                .map(|_| {
                    let phi = gaussian_state(sd.dim() / 2, &mut rng);
                    let mut psi = vec![C64::new(0.0, 0.0); sd.dim()];
                    for (b, p) in phi.iter().enumerate() {
                        psi[2 * b + i] = *p;
                    }
                    let c = overlaps_naive(&sd, &psi);
                    c.iter()
                        .zip(&reduced)
                        .map(|(ck, rk)| ck.norm_sqr() * qubit_distance(rk, &basis_qubit(i)))
                        .sum()
                })
                .collect();
            let mean = rs.iter().sum::<f64>() / 500.0;
            let se = (rs.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / 499.0 / 500.0).sqrt();
            let ok = mean <= bound + 3.0 * se;
            all &= ok;
            lines.push(format!("s{j}|{i}> {mean:.4}<={bound:.4}+3*{se:.4}"));
        }
    }
    outcome("4 Haar entanglement bound", all, format!("n=6, 500 bath states: {}", lines.join(", ")))
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(8080);
    let mut min_gain = f64::INFINITY;
    let mut lib_gap = 0.0f64;
    let samples: Vec<_> = (2..=5usize).map(|n| sample(n, 8000 + n as u64)).collect();
    for j in 0..100 {
        let (_, _, sd) = &samples[j % samples.len()];
        let d = sd.dim();
        let rank = 1 + j % d;
        let g = M::from_fn(d, rank, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
        let rho = &g * g.adjoint();
        let rho = &rho / rho.trace();
        let pinched = pinch_naive(sd.eigenvectors(), sd.eigenvalues(), sd.degeneracy_tolerance(), &rho);
        min_gain = min_gain.min(entropy_naive(&pinched) - entropy_naive(&rho));
        let lib = von_neumann_entropy(&DensityOperator::new(rho.clone()).unwrap()).unwrap();
        lib_gap = lib_gap.max((lib - entropy_naive(&rho)).abs());
    }
    let mut comm = 0.0f64;
    for (n, h, sd) in samples.iter().map(|(s, h, sd)| (s.n, h, sd)) {
        for k in 0..(1usize << n) {
            let omega = dephase(sd, &PureState::basis(sd.dim(), k).unwrap()).unwrap();
            let c = omega.matrix() * h - h * omega.matrix();
            comm = comm.max(frobenius(&c) / frobenius(h));
        }
    }
    outcome(
        "5 pinching max-entropy",
        min_gain >= -1e-10 && comm <= 1e-10 && lib_gap <= 1e-10,
        format!(
            "100 mixed states n=2..5: min S(P(rho))-S(rho) = {min_gain:.3e} (>=-1e-10); max |[omega,H]|_F/|H|_F = {comm:.2e} (<=1e-10); entropy agreement {lib_gap:.1e}"
        ),
    )
}

fn criterion_6() -> Outcome {
    let (_, _, sd) = sample(4, 9000);
    let k = 6;
    let mut psi0 = vec![C64::new(0.0, 0.0); sd.dim()];
    psi0[k] = C64::new(1.0, 0.0);
    let omega = dephase(&sd, &PureState::basis(sd.dim(), k).unwrap()).unwrap();
    let c = overlaps_naive(&sd, &psi0);
    let ipr: f64 = c.iter().map(|z| z.norm_sqr().powi(2)).sum();
    let samples = 10_000;
    let horizons = [1.0, 1e1, 1e2, 1e3, 1e4];
    let mut rng = ChaCha20Rng::seed_from_u64(9001);
    let residuals: Vec<f64> = horizons
        .iter()
        .map(|&horizon| {
            let mut avg = M::zeros(sd.dim(), sd.dim());
            for _ in 0..samples {
                avg += outer(&evolve_naive(&sd, &c, rng.random_range(0.0..horizon)));
            }
            avg /= C64::new(samples as f64, 0.0);
            let diff = &avg - omega.matrix();
            nonthermal::linalg::trace_norm_hermitian(&diff)
        })
        .collect();
    let noise = (sd.dim() as f64).sqrt() * (1.0 - ipr).sqrt() / (samples as f64).sqrt();
    let monotone = residuals.windows(2).all(|w| w[1] <= w[0] + noise);
    let last = residuals[residuals.len() - 1];
    outcome(
        "6 time-average convergence",
        last <= 0.05 && monotone && last < residuals[0],
        format!("n=4, 1e4 samples, T={horizons:?}: residuals {residuals:.4?}; final {last:.4} (<=0.05), monotone within noise {noise:.4}: {monotone}"),
    )
}

fn csv_bytes(out: &SweepOutput) -> (Vec<u8>, Vec<u8>, Vec<u8>) {
    let mut records = Vec::new();
    let mut aggregate = Vec::new();
    write_records_csv(&mut records, &out.records).unwrap();
    write_aggregate_csv(&mut aggregate, &out.panels).unwrap();
    let meta = serde_json::to_vec_pretty(&metadata_json(out, serde_json::Value::Null)).unwrap();
    (records, aggregate, meta)
}

fn criteria_7_to_9() -> Vec<Outcome> {
    let plan = ExperimentPlan { n_values: (3..=10).collect(), samples_per_n: 20, workers: 1, ..ExperimentPlan::default() };
    let start = Instant::now();
    let first = run_sweep(&plan).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let d_eff: Vec<f64> = first.panels.iter().map(|p| p.d_eff.mean).collect();
    let increasing = d_eff.windows(2).all(|w| w[1] > w[0]);
    let d3 = first.panel(3).unwrap().d_omega.mean;
    let d10 = first.panel(10).unwrap().d_omega.mean;
    let m9 = first.panel(9).unwrap().max_margin.mean;
    let m10 = first.panel(10).unwrap().max_margin.mean;
    let c7 = outcome(
        "7 ensemble trends",
        increasing && d10 >= 0.5 * d3 && m9 > 0.0 && m10 > 0.0,
        format!(
            "n=3..10, 20 samples ({elapsed:.0}s): (a) mean d_eff {d_eff:.3?} strictly increasing={increasing}; \
             (b) D_omega(10)={d10:.4} >= 0.5*D_omega(3)={:.4}; (c) mean max Delta n=9: {m9:.4}, n=10: {m10:.4} (>0)",
            0.5 * d3
        ),
    );

    let mut soft = Vec::new();
    let mut above = true;
    for n in [6, 8] {
        let a = first.alignment.iter().find(|a| a.n == n).unwrap();
        above &= a.median > 0.9;
        soft.push(format!(
            "n={n}: {} pairs, median {:.6}, min {:.6}, {:.1}% above 0.9",
            a.instances,
            a.median,
            a.min,
            100.0 * a.fraction_above_threshold
        ));
    }
    let c8 = Outcome { id: "8 best distinguisher is sigma^Z", passed: above, soft: true, summary: soft.join("; ") };

    let second = run_sweep(&ExperimentPlan { workers: 2, ..plan }).unwrap();
    let (a, b) = (csv_bytes(&first), csv_bytes(&second));
    let c9 = outcome(
        "9 determinism across worker counts",
        a == b,
        format!(
            "workers 1 vs 2: records {} bytes identical={}, aggregate identical={}, metadata identical={}",
            a.0.len(),
            a.0 == b.0,
            a.1 == b.1,
            a.2 == b.2
        ),
    );
    vec![c7, c8, c9]
}

fn main() {
    let mut results = Vec::new();
    for f in [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6] {
        let start = Instant::now();
        let r = f();
        println!("{} ({:.1}s)", line(&r), start.elapsed().as_secs_f64());
        results.push(r);
    }
    for r in criteria_7_to_9() {
        println!("{}", line(&r));
        results.push(r);
    }
    let hard_failures: Vec<_> = results.iter().filter(|r| !r.passed && !r.soft).map(|r| r.id).collect();
    println!(
        "acceptance: {}/{} criteria passed",
        results.iter().filter(|r| r.passed).count(),
        results.len()
    );
    if !hard_failures.is_empty() {
        eprintln!("failed: {}", hard_failures.join(", "));
        std::process::exit(1);
    }
}

fn line(r: &Outcome) -> String {
    let tag = match (r.passed, r.soft) {
        (true, _) => "PASS",
        (false, true) => "WARN",
        (false, false) => "FAIL",
    };
    format!("[{tag}] criterion {}: {}", r.id, r.summary)
}
