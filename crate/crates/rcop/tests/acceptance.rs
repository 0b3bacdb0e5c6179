//! Acceptance suite: one test per criterion, each printing a PASS/FAIL
//! line with its measured runtime. Tolerances are pinned in code.

use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use rcop::certify::{
    self, certify, gtrs_recession_certificate, CertifyOptions, TriState,
};
use rcop::demos;
use rcop::facial::{reduce_to_extreme, Equality, ReduceOptions};
use rcop::hull::{self, capped_simplex_project, domain_contains};
use rcop::matrixcore::{eig_sym, RectMatrix, SymMatrix};
use rcop::model::{
    build_fpca, build_fsvd, lift_qcqp, DomainSpec, Mat, QcqpConstraint, QcqpData, RcopInstance,
    TwoSidedLmi,
};
use rcop::rounding::{extract_qcqp, sign_definite_round};
use rcop::signs;
use rcop::solver::{solve_anchored, solve_dwr, solve_trs_oracle, SolveOptions};

struct Criterion {
    id: usize,
    label: &'static str,
    budget_secs: f64,
    failures: Vec<String>,
    notes: Vec<String>,
    started: Instant,
}

impl Criterion {
    fn new(id: usize, label: &'static str, budget_secs: f64) -> Self {
        Criterion { id, label, budget_secs, failures: Vec::new(), notes: Vec::new(), started: Instant::now() }
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }

    fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    fn finish(mut self) {
        let elapsed = self.started.elapsed().as_secs_f64();
        if elapsed > self.budget_secs {
            self.failures.push(format!(
                "runtime {elapsed:.2}s exceeded the {:.0}s budget",
                self.budget_secs
            ));
        }
        let verdict = if self.failures.is_empty() { "PASS" } else { "FAIL" };
        println!(
            "criterion {:2}: {verdict} [{elapsed:6.2}s] {} {}",
            self.id,
            self.label,
            self.notes.join("; ")
        );
        assert!(
            self.failures.is_empty(),
            "criterion {} failed:\n  {}",
            self.id,
            self.failures.join("\n  ")
        );
    }
}

fn tight_options() -> CertifyOptions {
    CertifyOptions {
        solve: SolveOptions { tol: 1e-9, ..Default::default() },
        ..Default::default()
    }
}

fn assert_chain(c: &mut Criterion, report: &certify::ExactnessReport, context: &str) {
    if let Some(m_star) = report.m_star {
        c.check(
            m_star <= report.m_bind,
            format!("{context}: m_star {} > m_bind {}", m_star, report.m_bind),
        );
    }
    c.check(
        report.m_bind <= report.m_tilde,
        format!("{context}: m_bind {} > m_tilde {}", report.m_bind, report.m_tilde),
    );
    c.check(
        report.m_tilde <= report.m,
        format!("{context}: m_tilde {} > m {}", report.m_tilde, report.m),
    );
}

#[test]
fn criterion_01_fixture_eg1() {
    let mut c = Criterion::new(1, "fixture eg1: exact spectral-capped optimum", 1.0);
    let certified = certify(&demos::eg1_instance(), &tight_options());
    c.check(
        (certified.solution.v_rel + 0.5).abs() <= 1e-6,
        format!("v_rel = {}", certified.solution.v_rel),
    );
    c.check(
        certified.report.verified.objective == TriState::True,
        format!("objective verdict {:?}", certified.report.verified.objective),
    );
    c.check(
        certified.report.gap.map_or(false, |g| g.abs() <= 1e-6),
        format!("gap = {:?}", certified.report.gap),
    );
    assert_chain(&mut c, &certified.report, "eg1");
    c.note(format!("v_rel = {:.9}", certified.solution.v_rel));
    c.finish();
}

#[test]
fn criterion_02_fixture_egbd() {
    let mut c = Criterion::new(2, "fixture egbd: certified unit gap", 1.0);
    let certified = certify(&demos::egbd_instance(), &tight_options());
    c.check(certified.solution.v_rel.abs() <= 1e-6, format!("v_rel = {}", certified.solution.v_rel));
    c.check(
        certified.report.v_ub.map_or(false, |v| (v - 1.0).abs() <= 1e-5),
        format!("v_ub = {:?}", certified.report.v_ub),
    );
    c.check(
        certified.report.verified.objective == TriState::False,
        format!("objective verdict {:?}", certified.report.verified.objective),
    );
    c.check(
        certified.report.gap.map_or(false, |g| (g - 1.0).abs() <= 1e-5),
        format!("gap = {:?}", certified.report.gap),
    );
    assert_chain(&mut c, &certified.report, "egbd");
    c.note(format!("gap = {:?}", certified.report.gap));
    c.finish();
}

#[test]
fn criterion_03_fixture_sd2qcqp() {
    let mut c = Criterion::new(3, "fixture sd2qcqp: sparse dual support", 1.0);
    let certified = certify(&demos::sd2qcqp_instance(), &tight_options());
    c.check(certified.solution.v_rel.abs() <= 1e-6, format!("v_rel = {}", certified.solution.v_rel));
    c.check(certified.report.m_bind == 2, format!("m_bind = {}", certified.report.m_bind));
    c.check(
        certified.report.m_star.map_or(false, |s| s <= 1),
        format!("m_star = {:?}", certified.report.m_star),
    );
    c.check(
        certified.report.verified.objective == TriState::True,
        format!("objective verdict {:?}", certified.report.verified.objective),
    );
    assert_chain(&mut c, &certified.report, "sd2qcqp");
    c.note(format!("m_bind = {}, m_star = {:?}", certified.report.m_bind, certified.report.m_star));
    c.finish();
}

/// Random single-constraint quadratic problems: the pipeline
/// solve -> reduce (objective pinned) -> extract must produce a rank-one
/// feasible vector attaining the relaxed value.
#[test]
fn criterion_04_qcqp1_pipeline() {
    let mut c = Criterion::new(4, "single-constraint quadratic pipeline", 30.0);
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let solve_opts = SolveOptions { tol: 1e-9, ..Default::default() };
    let mut optimal = 0;
    for trial in 0..50 {
        let n = rng.gen_range(2..=8);
        let q0 = SymMatrix::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let q0_lin: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        // mostly positive-definite constraint blocks keep the relaxation bounded
        let q1 = if trial % 5 == 4 {
            SymMatrix::from_fn(n, |_, _| rng.gen_range(-1.0..1.0))
        } else {
            let f: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            SymMatrix::from_fn(n, |i, j| {
                let mut s = if i == j { 0.3 } else { 0.0 };
                for t in 0..n {
                    s += f[i * n + t] * f[j * n + t] / n as f64;
                }
                s
            })
        };
        let q1_lin: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let x0: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.7..0.7)).collect();
        let v0 = q1.quad_form(&x0) + q1_lin.iter().zip(&x0).map(|(a, b)| a * b).sum::<f64>();
        let data = QcqpData {
            obj_quad: q0.clone(),
            obj_lin: q0_lin.clone(),
            constraints: vec![QcqpConstraint {
                quad: q1,
                lin: q1_lin,
                lo: v0 - rng.gen_range(0.1..1.0),
                hi: v0 + rng.gen_range(0.1..1.0),
            }],
        };
        let inst = lift_qcqp(&data).unwrap();
        let sol = solve_dwr(&inst, &solve_opts);
        if !sol.is_optimal() {
            continue; // unbounded or stalled instances are outside the criterion
        }
        optimal += 1;
        let reduced = match certify::reduce_optimal_face(&inst, &sol, 1e-6) {
            Ok(r) => r,
            Err(e) => {
                c.check(false, format!("trial {trial}: reduction failed: {e}"));
                continue;
            }
        };
        let Some(x) = reduced.x.as_sym().and_then(extract_qcqp) else {
            c.check(false, format!("trial {trial}: no rank-one extraction (rank {})", reduced.rank));
            continue;
        };
        let cval = data.constraints[0].quad.quad_form(&x)
            + data.constraints[0].lin.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>();
        let feasible = cval >= data.constraints[0].lo - 1e-7 * (1.0 + data.constraints[0].lo.abs())
            && cval <= data.constraints[0].hi + 1e-7 * (1.0 + data.constraints[0].hi.abs());
        c.check(feasible, format!("trial {trial}: extracted point infeasible ({cval})"));
        let value =
            q0.quad_form(&x) + q0_lin.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>();
        c.check(
            (value - sol.v_rel).abs() <= 1e-6 * (1.0 + sol.v_rel.abs()),
            format!("trial {trial}: gap {} too large", value - sol.v_rel),
        );
    }
    c.check(optimal >= 35, format!("only {optimal} of 50 solves were optimal"));
    c.note(format!("{optimal}/50 optimal, all extracted rank-one"));
    c.finish();
}

#[test]
fn criterion_05_trs_cross_oracle() {
    let mut c = Criterion::new(5, "trust-region cross-oracle", 10.0);
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    let solve_opts = SolveOptions { tol: 1e-9, ..Default::default() };
    let mut worst = 0.0f64;
    for trial in 0..50 {
        let n = rng.gen_range(2..=10);
        let q0 = SymMatrix::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let q_lin: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let data = QcqpData {
            obj_quad: q0.clone(),
            obj_lin: q_lin.clone(),
            constraints: vec![QcqpConstraint {
                quad: SymMatrix::identity(n),
                lin: vec![0.0; n],
                lo: f64::NEG_INFINITY,
                hi: 1.0,
            }],
        };
        let inst = lift_qcqp(&data).unwrap();
        let sol = solve_dwr(&inst, &solve_opts);
        c.check(sol.is_optimal(), format!("trial {trial}: status {:?}", sol.status));
        let analytic = solve_trs_oracle(&q0, &q_lin);
        let err = (sol.v_rel - analytic.value).abs();
        worst = worst.max(err);
        c.check(
            err <= 1e-6,
            format!("trial {trial} (n={n}): |v_rel - oracle| = {err:.3e}"),
        );
    }
    c.note(format!("worst |v_rel - oracle| = {worst:.2e}"));
    c.finish();
}

#[test]
fn criterion_06_pataki_bound() {
    let mut c = Criterion::new(6, "rank bound on random feasibility reductions", 30.0);
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    let mut worst_rank = 0;
    for trial in 0..200 {
        let n = rng.gen_range(3..=10);
        let m = rng.gen_range(1..=10);
        let h = hull::hull_of(&DomainSpec::psd_rank_k(n, 1).unwrap());
        let f: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x0 = Mat::Sym(SymMatrix::from_fn(n, |i, j| {
            (0..n).map(|t| f[i * n + t] * f[j * n + t]).sum()
        }));
        let eqs: Vec<Equality> = (0..m)
            .map(|_| {
                let a = Mat::Sym(SymMatrix::from_fn(n, |_, _| rng.gen_range(-1.0..1.0)));
                let value = a.inner(&x0);
                Equality { a, value }
            })
            .collect();
        match reduce_to_extreme(&h, &x0, &eqs, &[], &ReduceOptions::default()) {
            Ok(res) => {
                c.check(
                    res.bound_ok,
                    format!("trial {trial}: rank {} with {m} pins breaks the bound", res.rank),
                );
                worst_rank = worst_rank.max(res.rank);
                for eq in &res.pinned {
                    let v = eq.a.inner(&res.x);
                    c.check(
                        (v - eq.value).abs() <= 1e-7 * (1.0 + eq.value.abs()),
                        format!("trial {trial}: pinned drift {:.2e}", (v - eq.value).abs()),
                    );
                }
            }
            Err(e) => c.check(false, format!("trial {trial}: {e}")),
        }
    }
    c.note(format!("200 reductions, largest final rank {worst_rank}"));
    c.finish();
}

/// Sphere-sampling oracle for the fair component value with two groups.
fn fpca_sampling_oracle(a1: &SymMatrix, a2: &SymMatrix, rng: &mut ChaCha8Rng) -> f64 {
    let n = a1.order();
    let mut best = f64::NEG_INFINITY;
    for _ in 0..100_000 {
        let mut u: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm: f64 = u.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < 1e-9 {
            continue;
        }
        for v in &mut u {
            *v /= norm;
        }
        best = best.max(a1.quad_form(&u).min(a2.quad_form(&u)));
    }
    best
}

/// Rank-one oracle for the rectangular pair: samples the left vector and
/// optimizes the right vector in closed form over the unit ball.
fn fsvd_sampling_oracle(a1: &RectMatrix, a2: &RectMatrix, rng: &mut ChaCha8Rng) -> f64 {
    let n = a1.rows();
    let p = a1.cols();
    let mut best = 0.0f64;
    for _ in 0..100_000 {
        let mut u: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm: f64 = u.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < 1e-9 {
            continue;
        }
        for v in &mut u {
            *v /= norm;
        }
        let g = |a: &RectMatrix| -> Vec<f64> {
            (0..p).map(|j| (0..n).map(|i| u[i] * a.get(i, j)).sum()).collect()
        };
        let g1 = g(a1);
        let g2 = g(a2);
        // max over the v-ball of min(g1 . v, g2 . v) equals the smallest
        // norm over the segment between g1 and g2
        let d11: f64 = g1.iter().map(|x| x * x).sum();
        let d22: f64 = g2.iter().map(|x| x * x).sum();
        let d12: f64 = g1.iter().zip(&g2).map(|(a, b)| a * b).sum();
        let denom = d11 - 2.0 * d12 + d22;
        let lam = if denom > 1e-14 { ((d22 - d12) / denom).clamp(0.0, 1.0) } else { 0.5 };
        let val = (lam * lam * d11 + 2.0 * lam * (1.0 - lam) * d12 + (1.0 - lam) * (1.0 - lam) * d22)
            .max(0.0)
            .sqrt();
        best = best.max(val);
    }
    best
}

#[test]
fn criterion_07_fair_component_suites() {
    let mut c = Criterion::new(7, "fair component analysis relaxations", 20.0);
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    let solve_opts = SolveOptions { tol: 1e-9, ..Default::default() };

    let random_psd = |rng: &mut ChaCha8Rng, n: usize| -> SymMatrix {
        let f: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let raw = SymMatrix::from_fn(n, |i, j| (0..n).map(|t| f[i * n + t] * f[j * n + t]).sum());
        let eig = eig_sym(&raw).unwrap();
        let top = eig.values[0].max(1e-9);
        let mut m = raw;
        m.scale(1.0 / top);
        m
    };

    // k = 1: rank cap and value against the sphere oracle
    for trial in 0..4 {
        let n = 3;
        let a1 = random_psd(&mut rng, n);
        let a2 = random_psd(&mut rng, n);
        let family = build_fpca(&[a1.clone(), a2.clone()], 1).unwrap();
        let (best, sols) = solve_anchored(&family, &solve_opts);
        c.check(sols[best].is_optimal(), format!("fpca k=1 trial {trial}: not optimal"));
        let fair = -sols[best].v_rel;
        let sampled = fpca_sampling_oracle(&a1, &a2, &mut rng);
        c.check(
            (fair - sampled).abs() <= 1e-3,
            format!("fpca k=1 trial {trial}: value {fair:.6} vs sampled {sampled:.6}"),
        );
        let reduced = certify::reduce_optimal_face(&family[best], &sols[best], 1e-6).unwrap();
        c.check(
            domain_contains(&hull::hull_of(&family[best].domain), &reduced.x, 1e-6),
            format!("fpca k=1 trial {trial}: reduced rank {} exceeds 1", reduced.rank),
        );
    }

    // k = 2: rank cap only, larger instances
    for trial in 0..4 {
        let n = rng.gen_range(5..=8);
        let a1 = random_psd(&mut rng, n);
        let a2 = random_psd(&mut rng, n);
        let family = build_fpca(&[a1, a2], 2).unwrap();
        let (best, sols) = solve_anchored(&family, &solve_opts);
        c.check(sols[best].is_optimal(), format!("fpca k=2 trial {trial}: not optimal"));
        let reduced = certify::reduce_optimal_face(&family[best], &sols[best], 1e-6).unwrap();
        c.check(
            reduced.rank <= 2,
            format!("fpca k=2 trial {trial}: reduced rank {}", reduced.rank),
        );
    }

    // rectangular analogue on 3x5 data with k = 1
    for trial in 0..3 {
        let data1: Vec<f64> = (0..15).map(|_| rng.gen_range(-0.8..0.8)).collect();
        let data2: Vec<f64> = (0..15).map(|_| rng.gen_range(-0.8..0.8)).collect();
        let a1 = RectMatrix::from_rows(3, 5, &data1).unwrap();
        let a2 = RectMatrix::from_rows(3, 5, &data2).unwrap();
        let family = build_fsvd(&[a1.clone(), a2.clone()], 1).unwrap();
        let (best, sols) = solve_anchored(&family, &solve_opts);
        c.check(sols[best].is_optimal(), format!("fsvd trial {trial}: not optimal"));
        let fair = -sols[best].v_rel;
        let sampled = fsvd_sampling_oracle(&a1, &a2, &mut rng);
        c.check(
            (fair - sampled).abs() <= 1e-3,
            format!("fsvd trial {trial}: value {fair:.6} vs sampled {sampled:.6}"),
        );
        let reduced = certify::reduce_optimal_face(&family[best], &sols[best], 1e-6).unwrap();
        c.check(
            domain_contains(&hull::hull_of(&family[best].domain), &reduced.x, 1e-6),
            format!("fsvd trial {trial}: reduced rank {} exceeds 1", reduced.rank),
        );
    }
    c.note("fpca k=1/k=2 and fsvd 3x5 suites");
    c.finish();
}

#[test]
fn criterion_08_sign_definite_rounding() {
    let mut c = Criterion::new(8, "balanced sign-definite rounding", 10.0);
    let mut rng = ChaCha8Rng::seed_from_u64(108);
    let solve_opts = SolveOptions { tol: 1e-9, ..Default::default() };
    for trial in 0..30 {
        let n = rng.gen_range(2..=6);
        let nodes = n + 1;
        // balanced-by-construction signs from a random two-coloring
        let color: Vec<f64> = (0..nodes).map(|_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 }).collect();
        let mut sigma = vec![vec![0.0; nodes]; nodes];
        for i in 0..nodes {
            for j in (i + 1)..nodes {
                sigma[i][j] = -color[i] * color[j];
            }
        }
        let rand_matrix = |density: f64, rng: &mut ChaCha8Rng| -> (SymMatrix, Vec<f64>) {
            let mut quad = SymMatrix::zeros(n);
            let mut lin = vec![0.0; n];
            for i in 0..n {
                quad.set_sym(i, i, rng.gen_range(-1.0..1.0));
            }
            for i in 0..nodes {
                for j in (i + 1)..nodes {
                    if rng.gen_bool(density) {
                        let mag = rng.gen_range(0.1..1.0);
                        let v = sigma[i][j] * mag;
                        if i == 0 {
                            lin[j - 1] = 2.0 * v;
                        } else {
                            quad.set_sym(i - 1, j - 1, v);
                        }
                    }
                }
            }
            (quad, lin)
        };
        let (q0, l0) = rand_matrix(0.6, &mut rng);
        let (q1, l1) = rand_matrix(0.5, &mut rng);
        let data = QcqpData {
            obj_quad: q0.clone(),
            obj_lin: l0.clone(),
            constraints: vec![
                QcqpConstraint { quad: q1, lin: l1, lo: f64::NEG_INFINITY, hi: rng.gen_range(0.2..1.0) },
                QcqpConstraint {
                    quad: SymMatrix::identity(n),
                    lin: vec![0.0; n],
                    lo: f64::NEG_INFINITY,
                    hi: rng.gen_range(0.5..2.0),
                },
            ],
        };
        let (applies, balanced) = certify::sign_definite_check(&data);
        c.check(applies && balanced, format!("trial {trial}: generated pattern not balanced"));
        // the fast verdict agrees with exhaustive cycle enumeration
        let g = signs::sign_graph(&data);
        c.check(
            signs::balanced_by_cycle_enumeration(&g) == balanced,
            format!("trial {trial}: coloring and enumeration disagree"),
        );
        let inst = lift_qcqp(&data).unwrap();
        let sol = solve_dwr(&inst, &solve_opts);
        if !sol.is_optimal() {
            c.check(false, format!("trial {trial}: solver status {:?}", sol.status));
            continue;
        }
        let x_star = sol.x_star.as_sym().unwrap();
        match sign_definite_round(&data, x_star) {
            Ok(rounded) => {
                c.check(
                    inst.max_violation(&Mat::Sym(rounded.x_hat.clone())) <= 1e-6,
                    format!("trial {trial}: rounded point infeasible"),
                );
                let value = inst.objective.inner(&Mat::Sym(rounded.x_hat.clone()));
                c.check(
                    value <= sol.v_rel + 1e-6 * (1.0 + sol.v_rel.abs()),
                    format!("trial {trial}: rounded value {value} above v_rel {}", sol.v_rel),
                );
            }
            Err(e) => c.check(false, format!("trial {trial}: rounding failed: {e}")),
        }
    }
    // unbalanced graphs must also agree with enumeration
    let mut rng2 = ChaCha8Rng::seed_from_u64(1080);
    for _ in 0..50 {
        let nodes = rng2.gen_range(3..=8);
        let mut edges = Vec::new();
        for i in 0..nodes {
            for j in (i + 1)..nodes {
                if rng2.gen_bool(0.5) {
                    edges.push((i, j, if rng2.gen_bool(0.5) { 1i8 } else { -1 }));
                }
            }
        }
        let g = signs::SignGraph { nodes, edges, sign_definite: true };
        c.check(
            signs::balance_coloring(&g).is_some() == signs::balanced_by_cycle_enumeration(&g),
            "random graph: coloring and enumeration disagree",
        );
    }
    c.note("30 rounded instances + 50 balance cross-checks");
    c.finish();
}

#[test]
fn criterion_09_projection_suite() {
    let mut c = Criterion::new(9, "hull projection properties", 10.0);
    let mut rng = ChaCha8Rng::seed_from_u64(109);
    let hulls = vec![
        hull::hull_of(&DomainSpec::psd_rank_k(5, 1).unwrap()),
        hull::hull_of(&DomainSpec::psd_rank_k_spectral(5, 2).unwrap()),
        hull::hull_of(&DomainSpec::rect_rank_k_spectral(3, 6, 2).unwrap()),
    ];
    for h in &hulls {
        for trial in 0..1000 {
            let random = |rng: &mut ChaCha8Rng| -> Mat {
                if h.is_symmetric() {
                    Mat::Sym(SymMatrix::from_fn(h.n, |_, _| rng.gen_range(-2.0..2.0)))
                } else {
                    let data: Vec<f64> =
                        (0..h.n * h.p).map(|_| rng.gen_range(-2.0..2.0)).collect();
                    Mat::Rect(RectMatrix::from_rows(h.n, h.p, &data).unwrap())
                }
            };
            let y1 = random(&mut rng);
            let y2 = random(&mut rng);
            let p1 = hull::project(h, &y1);
            let p2 = hull::project(h, &y2);
            c.check(
                hull::project(h, &p1).sub(&p1).norm_fro() <= 1e-10,
                format!("{:?} trial {trial}: idempotence", h.kind),
            );
            c.check(
                p1.sub(&p2).norm_fro() <= y1.sub(&y2).norm_fro() + 1e-10,
                format!("{:?} trial {trial}: nonexpansiveness", h.kind),
            );
            c.check(
                hull::contains(h, &p1, 1e-8),
                format!("{:?} trial {trial}: membership", h.kind),
            );
            if trial < 100 {
                let z = hull::project(h, &random(&mut rng));
                c.check(
                    y1.sub(&p1).inner(&z.sub(&p1)) <= 1e-8,
                    format!("{:?} trial {trial}: variational inequality", h.kind),
                );
            }
        }
    }
    // capped simplex against the clip-pattern enumeration oracle
    for trial in 0..200 {
        let n = rng.gen_range(1..=6);
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.5..2.5)).collect();
        let budget = rng.gen_range(0.5..3.0);
        let got = capped_simplex_project(&y, 1.0, budget);
        let want = capped_simplex_oracle(&y, 1.0, budget);
        for (a, b) in got.iter().zip(&want) {
            c.check((a - b).abs() <= 1e-8, format!("capped simplex trial {trial}"));
        }
    }
    c.note("3000 projections + 200 capped-simplex cross-checks");
    c.finish();
}

/// Enumerates the 3^n clip patterns and returns the feasible minimizer.
fn capped_simplex_oracle(y: &[f64], cap: f64, budget: f64) -> Vec<f64> {
    let n = y.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut consider = |cand: Vec<f64>| {
        let sum: f64 = cand.iter().sum();
        if cand.iter().any(|&v| !(-1e-12..=cap + 1e-12).contains(&v)) || sum > budget + 1e-9 {
            return;
        }
        let d: f64 = cand.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
        if best.as_ref().map_or(true, |(bd, _)| d < *bd - 1e-15) {
            best = Some((d, cand));
        }
    };
    for pattern in 0..3usize.pow(n as u32) {
        let mut digits = Vec::with_capacity(n);
        let mut rest = pattern;
        for _ in 0..n {
            digits.push(rest % 3);
            rest /= 3;
        }
        let free: Vec<usize> = (0..n).filter(|&i| digits[i] == 1).collect();
        let fixed: f64 = (0..n).map(|i| if digits[i] == 2 { cap } else { 0.0 }).sum();
        let mut cand = vec![0.0; n];
        for i in 0..n {
            cand[i] = match digits[i] {
                0 => 0.0,
                2 => cap,
                _ => y[i],
            };
        }
        consider(cand);
        if !free.is_empty() {
            let free_sum: f64 = free.iter().map(|&i| y[i]).sum();
            let theta = (free_sum + fixed - budget) / free.len() as f64;
            if theta >= -1e-12 {
                let mut cand = vec![0.0; n];
                for i in 0..n {
                    cand[i] = match digits[i] {
                        0 => 0.0,
                        2 => cap,
                        _ => y[i] - theta,
                    };
                }
                consider(cand);
            }
        }
    }
    best.expect("enumeration always finds a feasible point").1
}

#[test]
fn criterion_10_gtrs_certificates() {
    let mut c = Criterion::new(10, "recession-ray certificates", 5.0);
    let mut rng = ChaCha8Rng::seed_from_u64(110);
    let mut produced = 0;
    let mut worst = 0.0f64;
    while produced < 100 {
        let n = rng.gen_range(2..=6);
        let kind = produced % 4;
        let (q1, q_lin, b1, y, alpha) = match kind {
            // strict: a strictly negative curvature direction
            0 | 1 => {
                let q1 = SymMatrix::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
                let eig = eig_sym(&q1).unwrap();
                if *eig.values.last().unwrap() >= -1e-6 {
                    continue;
                }
                let y = eig.vector(n - 1).to_vec();
                let q_lin: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect();
                (q1, q_lin, rng.gen_range(-1.0..1.0), y, rng.gen_range(0.0..4.0))
            }
            // kernel direction with the linear term projected out
            2 => {
                let mut vals: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                vals[n - 1] = 0.0;
                let basis = SymMatrix::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
                let frame = eig_sym(&basis).unwrap();
                let mut q1 = SymMatrix::zeros(n);
                for (j, &v) in vals.iter().enumerate() {
                    if v != 0.0 {
                        let col = frame.vector(j);
                        for a in 0..n {
                            for b in a..n {
                                q1.set_sym(a, b, q1.get(a, b) + v * col[a] * col[b]);
                            }
                        }
                    }
                }
                let y = frame.vector(n - 1).to_vec();
                let mut q_lin: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect();
                let dot: f64 = q_lin.iter().zip(&y).map(|(a, b)| a * b).sum();
                for (l, yi) in q_lin.iter_mut().zip(&y) {
                    *l -= dot * yi;
                }
                (q1, q_lin, rng.gen_range(-1.0..1.0), y, rng.gen_range(0.0..4.0))
            }
            // mixed-curvature zero direction (nonnegative bound keeps the
            // base point construction exact)
            _ => {
                let q1 = SymMatrix::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
                let eig = eig_sym(&q1).unwrap();
                let (lp, lm) = (eig.values[0], *eig.values.last().unwrap());
                if lp <= 1e-6 || lm >= -1e-6 {
                    continue;
                }
                let wp = eig.vector(0);
                let wm = eig.vector(n - 1);
                let a = 1.0;
                let b = (lp / -lm).sqrt();
                let y: Vec<f64> = (0..n).map(|i| a * wp[i] + b * wm[i]).collect();
                let mut q_lin: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect();
                let norm2: f64 = y.iter().map(|v| v * v).sum();
                let dot: f64 = q_lin.iter().zip(&y).map(|(a, b)| a * b).sum();
                for (l, yi) in q_lin.iter_mut().zip(&y) {
                    *l -= dot * yi / norm2;
                }
                (q1, q_lin, rng.gen_range(0.0..1.0), y, rng.gen_range(0.0..4.0))
            }
        };
        match gtrs_recession_certificate(&q1, &q_lin, b1, &y, alpha) {
            Ok(cert) => {
                worst = worst.max(cert.residual).max(cert.feasibility);
                c.check(
                    cert.residual <= 1e-8,
                    format!("case {kind}: residual {:.3e}", cert.residual),
                );
                c.check(
                    cert.feasibility <= 1e-8,
                    format!("case {kind}: feasibility {:.3e}", cert.feasibility),
                );
                produced += 1;
            }
            Err(e) => c.check(false, format!("case {kind}: rejected hypothesis-satisfying input: {e}")),
        }
    }
    c.note(format!("100 certificates, worst residual {worst:.2e}"));
    c.finish();
}

#[test]
fn criterion_11_notation_chain() {
    let mut c = Criterion::new(11, "notation chain m_star <= m_bind <= m_tilde <= m", 60.0);
    let opts = CertifyOptions::default();
    // all bundled fixtures
    for name in ["eg1", "eg2", "egray", "counter", "sdqcqp", "egbd", "sd2qcqp", "trs", "gtrs", "tgtrs", "hqp2"] {
        let inst = demos::instance(name).unwrap();
        let certified = certify(&inst, &opts);
        if certified.solution.is_optimal() {
            assert_chain(&mut c, &certified.report, name);
        }
    }
    // random instances across the domain kinds
    let mut rng = ChaCha8Rng::seed_from_u64(111);
    for trial in 0..12 {
        let n = rng.gen_range(2..=4);
        let kind = trial % 3;
        let domain = match kind {
            0 => DomainSpec::psd_rank_k(n, 1).unwrap(),
            1 => DomainSpec::psd_rank_k_spectral(n, 1).unwrap(),
            _ => DomainSpec::rect_rank_k_spectral(n, n + 2, 1).unwrap(),
        };
        let h = hull::hull_of(&domain);
        let rand_mat = |rng: &mut ChaCha8Rng| -> Mat {
            if h.is_symmetric() {
                Mat::Sym(SymMatrix::from_fn(n, |_, _| rng.gen_range(-1.0..1.0)))
            } else {
                let data: Vec<f64> = (0..n * (n + 2)).map(|_| rng.gen_range(-1.0..1.0)).collect();
                Mat::Rect(RectMatrix::from_rows(n, n + 2, &data).unwrap())
            }
        };
        let center = hull::interior_point(&h);
        let m = rng.gen_range(1..=3);
        let constraints: Vec<TwoSidedLmi> = (0..m)
            .map(|_| {
                let a = rand_mat(&mut rng);
                let v = a.inner(&center);
                TwoSidedLmi::new(a, v - rng.gen_range(0.05..0.5), v + rng.gen_range(0.05..0.5))
                    .unwrap()
            })
            .collect();
        let inst =
            RcopInstance::new(format!("chain-{trial}"), domain, rand_mat(&mut rng), constraints)
                .unwrap();
        let certified = certify(&inst, &opts);
        if certified.solution.is_optimal() {
            assert_chain(&mut c, &certified.report, &format!("chain-{trial}"));
        }
    }
    c.note("11 fixtures + 12 random certifications");
    c.finish();
}
