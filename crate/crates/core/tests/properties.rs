use hjnet::hamiltonian::EdgeHamiltonian;
use hjnet::network::{EdgeSpec, NetworkFunction, NetworkGrid, StarNetwork};
use hjnet::solvers::{compare, solve_acct, solve_imz, Boundary, SolveOptions};
use hjnet::verifier::{verify, Definition, Role, Status, VerifierOptions};
use hjnet::Hamiltonian;
use proptest::prelude::*;

fn actions() -> impl Strategy<Value = Vec<(f64, f64)>> {
    (
        (0.2..1.5f64, 0.0..2.0f64),
        (-1.5..-0.2f64, 0.0..2.0f64),
        prop::collection::vec((-1.5..1.5f64, 0.0..2.0f64), 0..3),
    )
        .prop_map(|(a, b, rest)| {
            let mut v = vec![a, b];
            v.extend(rest);
            v
        })
}

fn control_hamiltonian(n: usize) -> impl Strategy<Value = Hamiltonian> {
    prop::collection::vec(actions(), n).prop_map(|sets| {
        Hamiltonian::new(
            sets.iter().map(|s| EdgeHamiltonian::control(s)).collect(),
            20.0,
        )
        .unwrap()
    })
}

fn star(n: usize, m: usize) -> NetworkGrid {
    NetworkGrid::uniform(StarNetwork::symmetric(n, 1.0).unwrap(), m).unwrap()
}

fn brute_h(set: &[(f64, f64)], p: f64) -> f64 {
    set.iter()
        .map(|&(s, c)| -s * p - c)
        .fold(f64::NEG_INFINITY, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn h_minus_is_the_left_envelope(h in control_hamiltonian(1), a in 0.2..3.0f64, b in -2.0..2.0f64) {
        let q = Hamiltonian::new(vec![EdgeHamiltonian::quadratic(a, b, 0.0)], 20.0).unwrap();
        for ham in [&h, &q] {
            let p0 = ham.p0(0).unwrap();
            let mut prev = f64::INFINITY;
            for k in 0..=400 {
                let p = -10.0 + k as f64 * 0.05;
                let hm = ham.h_minus(0, p).unwrap();
                prop_assert!(hm <= prev + 1e-12);
                prev = hm;
                prop_assert!(hm <= ham.eval_vertex(0, p) + 1e-12);
                let brute = (0..=200).map(|i| ham.eval_vertex(0, p - 0.1 * i as f64)).fold(f64::INFINITY, f64::min);
                prop_assert!(hm <= brute + 1e-9);
                if p < p0 {
                    prop_assert_eq!(hm, ham.eval_vertex(0, p));
                }
            }
        }
    }

    #[test]
    fn support_of_outgoing_actions_is_the_hamiltonian(set in prop::collection::vec((0.0..2.0f64, -1.0..2.0f64), 1..6), p in -5.0..5.0f64) {
        let h = Hamiltonian::new(vec![EdgeHamiltonian::control(&set)], 20.0).unwrap();
        let fl = h.fl_set(0).unwrap();
        prop_assert!((fl.support(p) - brute_h(&set, p)).abs() < 1e-9);
    }

    #[test]
    fn quadratic_thresholds_are_roots(a in 0.2..3.0f64, b in -2.0..2.0f64, c in -1.0..1.0f64, lift in 0.01..5.0f64) {
        let h = Hamiltonian::new(vec![EdgeHamiltonian::quadratic(a, b, c)], 40.0).unwrap();
        let vertex = c - b * b / (4.0 * a);
        let level = vertex + lift;
        let disc = (b * b - 4.0 * a * (c - level)).sqrt();
        let (lo, hi) = ((-b - disc) / (2.0 * a), (-b + disc) / (2.0 * a));
        let t = h.sublevel_thresholds(0, level).unwrap();
        for v in [t.p_minus, t.p_low] {
            prop_assert!((v - lo).abs() < 1e-6);
        }
        for v in [t.p_high, t.p_plus] {
            prop_assert!((v - hi).abs() < 1e-6);
        }
        prop_assert!(h.sublevel_thresholds(0, vertex - 0.01).unwrap().is_empty());
    }

    #[test]
    fn control_hamiltonian_is_convex(set in actions(), p in -5.0..5.0f64, q in -5.0..5.0f64, t in 0.0..1.0f64) {
        let h = Hamiltonian::new(vec![EdgeHamiltonian::control(&set)], 20.0).unwrap();
        let mid = h.eval_vertex(0, t * p + (1.0 - t) * q);
        prop_assert!(mid <= t * h.eval_vertex(0, p) + (1.0 - t) * h.eval_vertex(0, q) + 1e-9);
        prop_assert!((h.eval_vertex(0, p) - brute_h(&set, p)).abs() < 1e-12);
    }

    #[test]
    fn schemes_agree_to_grid_accuracy(h in control_hamiltonian(3)) {
        let grid = star(3, 100);
        let opts = SolveOptions::default();
        let a = solve_imz(&h, &grid, &opts).unwrap();
        let b = solve_acct(&h, &grid, &opts).unwrap();
        prop_assert!(a.converged && b.converged);
        prop_assert!(compare(&a.solution, &b.solution).unwrap().sup_norm < 0.1);
    }

    #[test]
    fn raising_exit_cost_is_monotone(h in control_hamiltonian(2), g in -1.0..1.0f64, d in 0.0..0.5f64) {
        let grid = star(2, 60);
        let at = |v: f64| SolveOptions::default()
            .with_boundary(vec![Boundary::Dirichlet { value: v }, Boundary::StateConstraint]);
        for solve in [solve_imz, solve_acct] {
            let lo = solve(&h, &grid, &at(g)).unwrap().solution;
            let hi = solve(&h, &grid, &at(g + d)).unwrap().solution;
            for ((_, _, x), (_, _, y)) in lo.iter_nodes().zip(hi.iter_nodes()) {
                prop_assert!(y - x >= -1e-9 && y - x <= d + 1e-9);
            }
        }
    }

    #[test]
    fn relabelling_edges_relabels_the_solution(h in control_hamiltonian(3), shift in 1usize..3) {
        let grid = star(3, 50);
        let perm: Vec<usize> = (0..3).map(|j| (j + shift) % 3).collect();
        let permuted = Hamiltonian::new(perm.iter().map(|&k| h.edge(k).clone()).collect(), h.p_max()).unwrap();
        let u = solve_imz(&h, &grid, &SolveOptions::default()).unwrap().solution;
        let v = solve_imz(&permuted, &grid, &SolveOptions::default()).unwrap().solution;
        for (j, &k) in perm.iter().enumerate() {
            for i in 0..=50 {
                prop_assert!((v.value(j, i) - u.value(k, i)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn constants_solve_the_eikonal_problem(n in 2usize..6, c in 0.1..3.0f64) {
        let h = Hamiltonian::uniform(EdgeHamiltonian::eikonal(c), n, 10.0).unwrap();
        let grid = star(n, 40);
        let r = solve_imz(&h, &grid, &SolveOptions::default()).unwrap();
        prop_assert!(r.solution.iter_nodes().all(|(_, _, v)| (v - c).abs() < 1e-10));
        let opts = VerifierOptions { slope_tolerance: Some(0.0), ..VerifierOptions::with_tolerance(1e-6) };
        let report = verify(&r.solution, &h, &opts).unwrap();
        prop_assert!(report.all_passed());
        let above = verify(&r.solution.map(|v| v + 0.5), &h, &opts).unwrap();
        prop_assert_eq!(above.get(Definition::Imz, Role::Sub).unwrap().status, Status::Fail);
    }

    #[test]
    fn edges_are_straight_unit_rays(lengths in prop::collection::vec(0.1..3.0f64, 2..6), t in 0.0..1.0f64) {
        let n = lengths.len();
        let specs: Vec<EdgeSpec> = lengths
            .iter()
            .enumerate()
            .map(|(j, &length)| EdgeSpec { length, angle: std::f64::consts::TAU * j as f64 / n as f64 })
            .collect();
        let net = StarNetwork::new(&specs).unwrap();
        let grid = NetworkGrid::with_spacing(net.clone(), 0.05).unwrap();
        for (j, &l) in lengths.iter().enumerate() {
            let [x, y] = net.param_to_point(j, t * l).unwrap();
            prop_assert!(((x * x + y * y).sqrt() - t * l).abs() < 1e-12);
            let m = l / 0.05;
            prop_assert!(grid.spacing(j) >= l / (m + 0.5) - 1e-12 && grid.spacing(j) <= l / (m - 0.5) + 1e-12);
            prop_assert!((grid.position(j, grid.nodes(j)) - l).abs() < 1e-12);
        }
        let u = NetworkFunction::from_fn(grid.clone(), |j, y| j as f64 + y).unwrap();
        prop_assert!(u.iter_nodes().filter(|&(_, i, _)| i == 0).all(|(_, _, v)| v == 0.0));
    }
}
