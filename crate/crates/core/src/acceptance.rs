//! The acceptance suite: ten criteria, each with a seeded workload, an exact or toleranced check and a time budget.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::chain_complex::{two_step_filtration, x_les_check, Grading};
use crate::colimit::{lower_triangular_vanishing, random_two_block, BlockStep};
use crate::dg_nerve::{random_torsion_triangle, random_triangle, torsion_propagation, witness_identities, WitnessSigns};
use crate::equivariant_morse::{
    build_bg_model, build_cm_eq, free_orbit_model, point_model, random_model, unit_torsion_check, UnitClass,
};
use crate::error::Result;
use crate::fg_module::FinModule;
use crate::gen;
use crate::linear_model::{
    axiom_suite, c_r_linear, cz_index, extender_profile, mu_linear, random_angle, random_unitary, random_unitary_isotopy,
    spectrum, ConvexCutoff, IsotopyFamily, LinearIsotopy,
};
use crate::oracle;
use crate::par::*;
use crate::simplex_paths::{functoriality_sweep, q, random_interior_path, random_path, time_of};

pub const TOTAL_BUDGET: Duration = Duration::from_secs(120);

#[derive(Clone, Debug, Default)]
pub struct SuiteOptions {
    /// Flip one entry of the Koszul sign table before checking the witness.
    pub corrupt_sign: Option<String>,
    /// Criterion ids to run; empty runs all ten.
    pub only: Vec<u8>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    /// What failed; empty on success.
    pub failures: Vec<String>,
    pub checks: usize,
    #[serde(skip)]
    pub elapsed: Duration,
    #[serde(skip)]
    pub budget: Option<Duration>,
}

impl CriterionResult {
    pub fn within_budget(&self) -> bool {
        self.budget.is_none_or(|b| self.elapsed <= b)
    }

    pub fn line(&self) -> String {
        let budget = self.budget.map_or(String::new(), |b| format!(" / {} s", b.as_secs()));
        let status = if self.passed && self.within_budget() { "PASS" } else { "FAIL" };
        let mut s = format!(
            "[{status}] {:>2} {:<28} {:>5} checks  {:>8.3} s{budget}",
            self.id,
            self.name,
            self.checks,
            self.elapsed.as_secs_f64()
        );
        if !self.within_budget() {
            s.push_str("  over budget");
        }
        if let Some(f) = self.failures.first() {
            s.push_str(&format!("  first failure: {f}"));
        }
        s
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub criteria: Vec<CriterionResult>,
    pub all_pass: bool,
    pub within_budget: bool,
    #[serde(skip)]
    pub elapsed: Duration,
}

/// Collects failures of one criterion.
#[derive(Default)]
struct Tally {
    checks: usize,
    failures: Vec<String>,
}

impl Tally {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn result<T>(&mut self, r: Result<T>, what: impl FnOnce() -> String) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.checks += 1;
                self.failures.push(format!("{}: {e}", what()));
                None
            }
        }
    }

    fn merge(&mut self, other: Tally) {
        self.checks += other.checks;
        self.failures.extend(other.failures);
    }
}

fn run(id: u8, name: &'static str, budget: Option<u64>, body: impl FnOnce(&mut Tally)) -> CriterionResult {
    let start = Instant::now();
    let mut t = Tally::default();
    body(&mut t);
    CriterionResult {
        id,
        name,
        passed: t.failures.is_empty(),
        failures: t.failures,
        checks: t.checks,
        elapsed: start.elapsed(),
        budget: budget.map(Duration::from_secs),
    }
}

fn par_tally<T: Send + Sync>(items: &[T], f: impl Fn(&T) -> Tally + Send + Sync) -> Tally {
    let parts: Vec<Tally> = items.par_iter().map(f).collect();
    let mut out = Tally::default();
    for p in parts {
        out.merge(p);
    }
    out
}

pub fn bg_cohomology() -> CriterionResult {
    run(1, "BG cohomology", Some(5), |t| {
        for p in [2u32, 3, 5] {
            let Some(bg) = t.result(build_bg_model(p, 8), || format!("BG model p = {p}")) else { continue };
            let Some(c) = t.result(build_cm_eq(&point_model(p), &bg, 16), || format!("point model p = {p}")) else {
                continue;
            };
            let h = c.homology();
            let free = FinModule::free(1);
            t.check(h.even == free, || format!("p = {p}: even homology {}", h.even));
            if p == 2 {
                t.check(c.complex.grading() == Grading::Ungraded, || "p = 2 model is not ungraded".into());
            } else {
                t.check(h.odd == free, || format!("p = {p}: odd homology {}", h.odd));
            }
        }
    })
}

pub fn unit_dichotomy() -> CriterionResult {
    run(2, "unit dichotomy", Some(10), |t| {
        let seeds: Vec<u64> = (0..20).collect();
        let sub = par_tally(&seeds, |&k| {
            let mut t = Tally::default();
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0200 + k);
            let p = [2u32, 3, 5][k as usize % 3];
            let Some(bg) = t.result(build_bg_model(p, 4), || format!("BG model p = {p}")) else { return t };
            let fixed = rng.random_range(1..=2);
            let free = rng.random_range(0..=2);
            let w = random_model(&mut rng, p, fixed, free);
            if let Some(c) = t.result(build_cm_eq(&w, &bg, 16), || format!("model {k} with fixed points")) {
                if let Some(v) = t.result(unit_torsion_check(&c), || format!("model {k}")) {
                    t.check(v.class == UnitClass::NotTorsion, || format!("model {k} (p = {p}): unit is {:?}", v.class));
                }
            }
            let orbits = rng.random_range(1..=2);
            let w = if k % 4 == 0 { free_orbit_model(p) } else { random_model(&mut rng, p, 0, orbits) };
            if let Some(c) = t.result(build_cm_eq(&w, &bg, 16), || format!("free model {k}")) {
                if let Some(v) = t.result(unit_torsion_check(&c), || format!("free model {k}")) {
                    t.check(v.class == UnitClass::Torsion && v.annihilator.is_some(), || {
                        format!("free model {k} (p = {p}): unit is {:?}, annihilator {:?}", v.class, v.annihilator)
                    });
                }
            }
            t
        });
        t.merge(sub);
    })
}

pub fn conley_zehnder() -> CriterionResult {
    run(3, "Conley-Zehnder index", Some(20), |t| {
        for n in 1..=4 {
            for eps in [0.1, 0.5, 0.9] {
                let r = cz_index(&LinearIsotopy::reeb(n, eps));
                t.check(r == Ok(n as i64), || format!("CZ(R_{{{eps}t}}) on C^{n} = {r:?}"));
            }
        }
        let seeds: Vec<u64> = (0..200).collect();
        let sub = par_tally(&seeds, |&k| {
            let mut t = Tally::default();
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0300 + k);
            let n = rng.random_range(1..=4);
            let a: Vec<f64> = (0..n).map(|_| random_angle(&mut rng, -3.0, 3.0, 0.02)).collect();
            let want = oracle::cz_diagonal(&a);
            let iso = LinearIsotopy::diagonal(&a);
            if let Some(got) = t.result(cz_index(&iso), || format!("diagonal {a:?}")) {
                t.check(got == want, || format!("diagonal {a:?}: CZ {got}, oracle {want}"));
            }
            let u = random_unitary(&mut rng, n);
            if let Some(conj) = t.result(iso.conjugate(&u), || "conjugation".into()) {
                let got = cz_index(&conj);
                t.check(got == Ok(want), || format!("conjugated diagonal {a:?}: CZ {got:?}, oracle {want}"));
            }
            t
        });
        t.merge(sub);
        let (a, b) = (LinearIsotopy::diagonal(&[2.3, -0.4]), LinearIsotopy::diagonal(&[0.7]));
        let sum = cz_index(&a.direct_sum(&b));
        let parts = cz_index(&a).and_then(|x| Ok(x + cz_index(&b)?));
        t.check(sum.is_ok() && sum == parts, || format!("direct sum {sum:?} vs {parts:?}"));
    })
}

pub fn mu_agrees_with_cz() -> CriterionResult {
    run(4, "mu = CZ - n", None, |t| {
        let seeds: Vec<u64> = (0..100).collect();
        let sub = par_tally(&seeds, |&k| {
            let mut t = Tally::default();
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0400 + k);
            let n = rng.random_range(1..=3);
            let Some((iso, angles)) = t.result(random_unitary_isotopy(&mut rng, n), || format!("isotopy {k}")) else {
                return t;
            };
            let want = oracle::cz_diagonal(&angles) - n as i64;
            let (mu, cz) = (mu_linear(&iso), cz_index(&iso));
            t.check(mu == Ok(want) && cz == Ok(want + n as i64), || {
                format!("isotopy {k} with angles {angles:?}: mu {mu:?}, CZ {cz:?}, oracle mu {want}")
            });
            t
        });
        t.merge(sub);
    })
}

pub fn linear_axioms() -> CriterionResult {
    run(5, "linear-model axioms", None, |t| {
        for n in [1usize, 2] {
            let Some(r) = t.result(axiom_suite(&IsotopyFamily::reeb(n), (0.05, 2.95), 59), || format!("axiom suite n = {n}"))
            else {
                continue;
            };
            t.check(r.holds(), || format!("n = {n}: axioms {r:?}"));
            t.check(r.jumps.len() == 2, || format!("n = {n}: {} jumps", r.jumps.len()));
            for (j, at) in r.jumps.iter().zip([1.0, 2.0]) {
                t.check((j.at - at).abs() < 1e-9 && j.to - j.from == 2 * n as i64, || {
                    format!("n = {n}: jump at {} by {}", j.at, j.to - j.from)
                });
            }
            let constant_between = r.samples.iter().all(|&(s, m)| m == 2 * n as i64 * s.floor() as i64);
            t.check(constant_between, || format!("n = {n}: samples {:?}", r.samples));
        }
        for s0 in [0.1, 0.7, 1.5, 2.25] {
            let iso = LinearIsotopy::reeb(2, s0);
            if let Some(c) = t.result(c_r_linear(&iso), || format!("c_R at s0 = {s0}")) {
                t.check((c.value - s0).abs() < 1e-9, || format!("c_R(R_{{{s0}t}}) = {}", c.value));
            }
        }
        for n in 1..=3 {
            let id = LinearIsotopy::identity(n);
            if let Some(w) = t.result(spectrum(id.time_one(), (-1.0, 1.0)), || "identity spectrum".into()) {
                t.check(w.is_empty_on(-1.0, 0.0) && w.is_empty_on(0.0, 1.0), || format!("identity spectrum {:?}", w.points));
            }
        }
    })
}

pub fn dg_nerve_witness(options: &SuiteOptions) -> CriterionResult {
    let signs = match &options.corrupt_sign {
        Some(field) => match WitnessSigns::koszul().flipped(field) {
            Some(s) => Ok(s),
            None => Err(format!("no sign named {field:?}")),
        },
        None => Ok(WitnessSigns::koszul()),
    };
    run(6, "dg-nerve witness", Some(10), |t| {
        let signs = match signs {
            Ok(s) => s,
            Err(e) => {
                t.check(false, || e);
                return;
            }
        };
        let seeds: Vec<u64> = (0..200).collect();
        let sub = par_tally(&seeds, |&k| {
            let mut t = Tally::default();
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0600 + k);
            let p = [2u32, 3, 5][k as usize % 3];
            let Some(tri) = t.result(random_triangle(&mut rng, p, 8, 3), || format!("triangle {k}")) else { return t };
            let label = match &options.corrupt_sign {
                Some(f) => format!("koszul signs with {f} flipped"),
                None => "koszul signs".to_string(),
            };
            let mut tables = vec![(label, signs)];
            if p == 2 {
                tables.push(("unsigned signs".to_string(), WitnessSigns::unsigned()));
            }
            for (label, s) in tables {
                if let Some(ids) = t.result(witness_identities(&tri.f, &tri.g, &tri.h, &tri.k, &s), || format!("triangle {k}")) {
                    for (id, ok) in ids {
                        t.check(ok, || format!("{id} fails over F_{p} with {label} (instance {k})"));
                    }
                }
            }
            t
        });
        t.merge(sub);
    })
}

pub fn torsion_propagation_sweep() -> CriterionResult {
    run(7, "torsion propagation", Some(30), |t| {
        let seeds: Vec<u64> = (0..200).collect();
        let sub = par_tally(&seeds, |&k| {
            let mut t = Tally::default();
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0700 + k);
            let (a, b) = (rng.random_range(0..=3), rng.random_range(0..=3));
            let Some(tri) = t.result(random_torsion_triangle(&mut rng, 2, 16, 3, a, b), || format!("triangle {k}")) else {
                return t;
            };
            if let Some(v) = t.result(torsion_propagation(&tri.f, &tri.g, &tri.h, &tri.k), || format!("triangle {k}")) {
                t.check(v.hypothesis && v.conclusion && v.holds(), || format!("triangle {k}: {v:?}"));
            }
            t
        });
        t.merge(sub);
    })
}

pub fn path_combinatorics() -> CriterionResult {
    run(8, "path combinatorics", Some(15), |t| {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0800);
        for _ in 0..50 {
            let p = random_path(&mut rng, 3);
            let (x1, x2) = (&p.cube()[0], &p.cube()[1]);
            let ok = p.taus()[1] == q(1, 1) + x1 * (q(1, 1) + x2) && p.taus()[2] == q(2, 1) + x2;
            t.check(ok, || format!("closed forms fail on {p}"));
        }
        for k in 0..500 {
            let p = random_interior_path(&mut rng, 1 + k % 6);
            match p.interval_layout() {
                Ok(l) => t.check(l.interiors_disjoint() && l.descending(), || format!("layout of {p}")),
                Err(e) => t.check(false, || format!("layout of {p}: {e}")),
            }
        }
        for k in 0..100 {
            let n = 1 + k % 5;
            let p = random_path(&mut rng, n);
            for j in 0..=(4 * n as i64) {
                let tau = q(j, 4);
                let ok = p.evaluate(&tau).is_ok_and(|th| time_of(&th) == tau);
                t.check(ok, || format!("unit speed fails at {tau} on {p}"));
            }
        }
        let sweep = functoriality_sweep(3, 20, 0x5eed_0801);
        t.checks += sweep.checks;
        t.failures.extend(sweep.failures);
    })
}

pub fn homological_algebra() -> CriterionResult {
    run(9, "homological algebra", Some(30), |t| {
        let seeds: Vec<u64> = (0..50).collect();
        let sub = par_tally(&seeds, |&k| {
            let mut t = Tally::default();
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0900 + k);
            let p = [2u32, 3, 5][k as usize % 3];
            let c = gen::random_complex(&mut rng, p, 8, 6).complex;
            t.check(x_les_check(&c).exact, || format!("x-LES not exact on complex {k}"));

            let (cone, sub) = gen::random_filtered_complex(&mut rng, p, 8);
            if let Some(r) = t.result(two_step_filtration(&cone, &sub), || format!("filtration {k}")) {
                t.check(r.inequality_holds, || format!("filtration inequality fails on {k}"));
            }
            let a = gen::random_complex(&mut rng, p, 8, 3).complex;
            let b = gen::random_complex(&mut rng, p, 8, 3).complex;
            if let Some(sum) = t.result(a.direct_sum(&b), || "direct sum".into()) {
                let idx: Vec<usize> = (0..a.len()).collect();
                if let Some(r) = t.result(two_step_filtration(&sum, &idx), || format!("split filtration {k}")) {
                    t.check(r.inequality_holds && r.equality, || format!("split filtration {k} is not an equality"));
                }
            }

            let killed = k % 2 == 0;
            let steps: &[BlockStep] =
                if killed { &[BlockStep::Push, BlockStep::Kill, BlockStep::Kill] } else { &[BlockStep::Keep, BlockStep::Push] };
            let diagram = random_two_block(&mut rng, p, 6, steps, !killed);
            if let Some(d) = t.result(diagram, || format!("two-block diagram {k}")) {
                if let Some(v) = t.result(lower_triangular_vanishing(&d), || format!("two-block diagram {k}")) {
                    t.check(v.holds(), || format!("two-block diagram {k}: verdict disagrees with brute force"));
                    if killed {
                        t.check(v.hypothesis.contains(&0) && v.per_index[0].brute_force.is_some(), || {
                            format!("two-block diagram {k}: killed diagonals but the total survives")
                        });
                    }
                }
            }
            t
        });
        t.merge(sub);
    })
}

pub fn extender_profiles() -> CriterionResult {
    run(10, "extender profile", Some(5), |t| {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_1000);
        let sigmas: Vec<f64> = (1..20).map(|k| k as f64 / 20.0).collect();
        for k in 0..50 {
            let g = ConvexCutoff::random(&mut rng);
            let mut last: Option<f64> = None;
            for &s in &sigmas {
                let Some(e) = t.result(extender_profile(&g, s), || format!("cutoff {k} at {s}")) else { continue };
                t.check(e.unique && e.negative && e.residual <= 1e-9 && e.action < 0.0, || {
                    format!("cutoff {k} at sigma {s}: {e:?}")
                });
                t.check(last.is_none_or(|l| e.s_star > l), || format!("cutoff {k}: S* not increasing at {s}"));
                last = Some(e.s_star);
            }
        }
    })
}

pub fn run_suite(options: &SuiteOptions) -> SuiteReport {
    let start = Instant::now();
    let wanted = |id: u8| options.only.is_empty() || options.only.contains(&id);
    let all: [(u8, &dyn Fn() -> CriterionResult); 10] = [
        (1, &bg_cohomology),
        (2, &unit_dichotomy),
        (3, &conley_zehnder),
        (4, &mu_agrees_with_cz),
        (5, &linear_axioms),
        (6, &|| dg_nerve_witness(options)),
        (7, &torsion_propagation_sweep),
        (8, &path_combinatorics),
        (9, &homological_algebra),
        (10, &extender_profiles),
    ];
    let criteria: Vec<CriterionResult> = all.iter().filter(|(id, _)| wanted(*id)).map(|(_, run)| run()).collect();
    let elapsed = start.elapsed();
    let all_pass = criteria.iter().all(|c| c.passed);
    let within_budget = elapsed <= TOTAL_BUDGET && criteria.iter().all(CriterionResult::within_budget);
    SuiteReport { criteria, all_pass, within_budget, elapsed }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corrupted_sign_is_named() {
        let r = dg_nerve_witness(&SuiteOptions { corrupt_sign: Some("delta_corner".into()), ..Default::default() });
        assert!(!r.passed);
        assert!(r.failures.iter().any(|f| f.contains("d_delta^2 = 0") || f.contains("chain map")), "{:?}", r.failures);
        let r = dg_nerve_witness(&SuiteOptions { corrupt_sign: Some("nonsense".into()), ..Default::default() });
        assert!(!r.passed);
    }

    #[test]
    fn quick_criteria_pass() {
        for r in [bg_cohomology(), extender_profiles()] {
            assert!(r.passed, "{}", r.line());
        }
    }
}
