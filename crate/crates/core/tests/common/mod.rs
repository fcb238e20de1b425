#![allow(dead_code)]

use hjnet::network::{NetworkFunction, NetworkGrid};
use hjnet::Problem;

pub const FIXTURES: [(&str, &str); 8] = [
    (
        "eikonal3",
        include_str!("../../../../fixtures/eikonal3.json"),
    ),
    (
        "eikonal3_control",
        include_str!("../../../../fixtures/eikonal3_control.json"),
    ),
    (
        "two_star",
        include_str!("../../../../fixtures/two_star.json"),
    ),
    (
        "three_star_mixed",
        include_str!("../../../../fixtures/three_star_mixed.json"),
    ),
    (
        "five_star_mixed",
        include_str!("../../../../fixtures/five_star_mixed.json"),
    ),
    (
        "sym_two_star",
        include_str!("../../../../fixtures/sym_two_star.json"),
    ),
    (
        "sym_three_star",
        include_str!("../../../../fixtures/sym_three_star.json"),
    ),
    (
        "shifted_abs2",
        include_str!("../../../../fixtures/shifted_abs2.json"),
    ),
];

pub fn fixture(name: &str) -> Problem {
    let (_, text) = FIXTURES
        .iter()
        .find(|(n, _)| *n == name)
        .unwrap_or_else(|| panic!("no fixture {name}"));
    Problem::from_json(text).unwrap_or_else(|e| panic!("fixture {name}: {e}"))
}

/// Same problem with `m` nodes on every edge.
pub fn with_nodes(p: &Problem, m: usize) -> Problem {
    Problem {
        grid: NetworkGrid::uniform(p.grid.network().clone(), m).unwrap(),
        ..p.clone()
    }
}

fn edit(u: &NetworkFunction, f: impl Fn(usize, f64, f64) -> f64) -> NetworkFunction {
    let g = u.grid();
    let mut w = u.clone();
    for j in 0..g.num_edges() {
        for i in 1..=g.nodes(j) {
            w.set(j, i, f(j, g.position(j, i), u.value(j, i)));
        }
    }
    w
}

/// Candidate functions built around a solution: the solutions themselves,
/// strict sub- and supersolutions (shifts and constants), and perturbations
/// of the vertex value and of the edge slopes.
pub fn corpus(solutions: &[(&str, &NetworkFunction)]) -> Vec<(String, NetworkFunction)> {
    let mut out: Vec<(String, NetworkFunction)> = solutions
        .iter()
        .map(|(n, u)| (n.to_string(), (*u).clone()))
        .collect();
    let u = solutions[0].1;
    for s in [1.0, 0.3, 0.05, -0.05, -0.3] {
        out.push((format!("shift {s:+}"), u.map(|v| v + s)));
    }
    for s in [0.1, 0.01, -0.01, -0.1] {
        let mut w = u.clone();
        w.set_vertex_value(u.vertex_value() + s);
        out.push((format!("vertex {s:+}"), w));
    }
    for a in [0.5, -0.5] {
        out.push((format!("tilt {a:+}"), edit(u, |_, y, v| v + a * y)));
        out.push((
            format!("tilt edge 0 {a:+}"),
            edit(u, |j, y, v| if j == 0 { v + a * y } else { v }),
        ));
    }
    out.push((
        "bump".into(),
        edit(u, |j, y, v| {
            v + 0.2 * (std::f64::consts::PI * y).sin() * (j % 2) as f64
        }),
    ));
    out.push(("zero".into(), u.map(|_| 0.0)));
    out.push(("three".into(), u.map(|_| 3.0)));
    out
}
