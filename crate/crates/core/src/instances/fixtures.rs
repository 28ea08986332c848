use std::collections::BTreeMap;

use crate::model::{Instance, ScoringVector};
use crate::solve::SolveMode;

/// Optimum the solvers must reproduce for one mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expectation {
    pub mode: SolveMode,
    pub welfare: i64,
    /// Number of optimal outcomes, when the construction pins it.
    pub optimal_count: Option<u64>,
    /// The optimal outcome, when the construction pins it.
    pub outcome: Option<Vec<Vec<usize>>>,
    pub note: &'static str,
}

/// Per-agent utilities in a specific outcome of a fixture.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UtilityAnnotation {
    pub outcome: Vec<Vec<usize>>,
    pub welfare: i64,
    /// `(agent, utility)` for every agent.
    pub utilities: Vec<(usize, i64)>,
    pub note: &'static str,
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: &'static str,
    pub instance: Instance,
    pub named_agents: BTreeMap<&'static str, usize>,
    pub expected: Vec<Expectation>,
    pub annotations: Vec<UtilityAnnotation>,
}

impl Fixture {
    pub fn agent(&self, name: &str) -> usize {
        self.named_agents[name]
    }

    pub fn expectation(&self, mode: SolveMode) -> Option<&Expectation> {
        self.expected.iter().find(|e| e.mode == mode)
    }
}

fn cycle_view_scoring() -> ScoringVector {
    ScoringVector::new(vec![1, 1, -1, -1, -1, -1]).expect("valid scoring vector")
}

/// Path `p1..p5` on agents 0..5 whose endpoints are joined to every agent of a
/// clique on `clique` further agents. Returns the edges.
fn path_with_clique(clique: usize) -> Vec<(usize, usize)> {
    let k: Vec<usize> = (5..5 + clique).collect();
    let mut edges: Vec<(usize, usize)> = (1..5).map(|i| (i - 1, i)).collect();
    for (a, &u) in k.iter().enumerate() {
        for &v in &k[a + 1..] {
            edges.push((u, v));
        }
    }
    for &u in &k {
        edges.push((0, u));
        edges.push((4, u));
    }
    edges
}

fn agents(names: &[(&'static str, usize)]) -> BTreeMap<&'static str, usize> {
    names.iter().copied().collect()
}

/// Ten agents: a 5-path (0..5, centre `x` = 2) whose endpoints see all of a
/// 5-clique (5..10). With `s = (1,1,-1,-1,-1,-1)` the welfare optimum is the
/// grand coalition, which `x` wants to leave.
pub fn make_lemma2() -> Fixture {
    let instance = Instance::new(10, path_with_clique(5), cycle_view_scoring(), false)
        .expect("fixture is a simple graph");
    let x = 2;
    let grand: Vec<usize> = (0..10).collect();
    let rest: Vec<usize> = (0..10).filter(|&a| a != x).collect();

    let mut grand_utils: Vec<(usize, i64)> = (0..10).map(|a| (a, 7)).collect();
    grand_utils[x].1 = -1;
    let split_utils = vec![
        (0, 6),
        (1, 4),
        (2, 0),
        (3, 4),
        (4, 6),
        (5, 8),
        (6, 8),
        (7, 8),
        (8, 8),
        (9, 8),
    ];

    Fixture {
        name: "lemma2",
        instance,
        named_agents: agents(&[("p1", 0), ("p2", 1), ("x", 2), ("p4", 3), ("p5", 4)]),
        expected: vec![
            Expectation {
                mode: SolveMode::Wf,
                welfare: 62,
                optimal_count: Some(1),
                outcome: Some(vec![grand.clone()]),
                note: "grand coalition is the unique welfare optimum",
            },
            Expectation {
                mode: SolveMode::WfIr,
                welfare: 60,
                optimal_count: None,
                outcome: Some(vec![rest.clone(), vec![x]]),
                note: "x alone, everyone else together",
            },
        ],
        annotations: vec![
            UtilityAnnotation {
                outcome: vec![grand],
                welfare: 62,
                utilities: grand_utils,
                note: "x sees 4 agents within distance 2 and 5 beyond",
            },
            UtilityAnnotation {
                outcome: vec![rest, vec![x]],
                welfare: 60,
                utilities: split_utils,
                note: "path neighbours of x lose their shortcut",
            },
        ],
    }
}

/// Ten agents: a 5-path (0..5, centre `x` = 2) whose endpoints see all of a
/// 4-clique (5..9), plus `y` = 9 hanging off `x`. The best individually
/// rational outcome `({y}, C)` is not Nash stable.
pub fn make_lemma3() -> Fixture {
    let mut edges = path_with_clique(4);
    let (x, y) = (2, 9);
    edges.push((x, y));
    let instance =
        Instance::new(10, edges, cycle_view_scoring(), false).expect("fixture is a simple graph");
    let c: Vec<usize> = (0..9).collect();
    let c_minus_x: Vec<usize> = (0..9).filter(|&a| a != x).collect();

    let mut c_utils: Vec<(usize, i64)> = (0..10).map(|a| (a, 6)).collect();
    c_utils[x].1 = 0;
    c_utils[y].1 = 0;
    let pair_utils = vec![
        (0, 5),
        (1, 3),
        (2, 1),
        (3, 3),
        (4, 5),
        (5, 7),
        (6, 7),
        (7, 7),
        (8, 7),
        (9, 1),
    ];

    Fixture {
        name: "lemma3",
        instance,
        named_agents: agents(&[
            ("p1", 0),
            ("p2", 1),
            ("x", 2),
            ("p4", 3),
            ("p5", 4),
            ("y", 9),
        ]),
        expected: vec![
            Expectation {
                mode: SolveMode::WfIr,
                welfare: 48,
                optimal_count: Some(1),
                outcome: Some(vec![c.clone(), vec![y]]),
                note: "({y}, C) is the unique individually rational optimum",
            },
            Expectation {
                mode: SolveMode::WfNs,
                welfare: 46,
                optimal_count: None,
                outcome: Some(vec![c_minus_x.clone(), vec![x, y]]),
                note: "({x,y}, C minus x) is Nash stable",
            },
        ],
        annotations: vec![
            UtilityAnnotation {
                outcome: vec![c, vec![y]],
                welfare: 48,
                utilities: c_utils,
                note: "x breaks even inside C",
            },
            UtilityAnnotation {
                outcome: vec![c_minus_x, vec![x, y]],
                welfare: 46,
                utilities: pair_utils,
                note: "x and y pair up",
            },
        ],
    }
}
