use std::collections::HashMap;
use std::fmt;

use crate::rewrite::{class_key, redexes, step};
use crate::syntax::{Base, Expr, Res, Supply};

/// Outcome of the exhaustive search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SnVerdict {
    /// The graph of classes reachable by reduction is finite and acyclic.
    StronglyNormalising {
        max_path_len: usize,
        graph_size: usize,
    },
    Diverges(Divergence),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Divergence {
    /// A definitive witness: classes `c0 → c1 → … → c0`, listed once each.
    Cycle(Vec<Expr>),
    /// The class budget ran out; nothing is known.
    Fuel { explored: usize },
}

impl SnVerdict {
    pub fn is_sn(&self) -> bool {
        matches!(self, SnVerdict::StronglyNormalising { .. })
    }

    pub fn cycle(&self) -> Option<&[Expr]> {
        match self {
            SnVerdict::Diverges(Divergence::Cycle(c)) => Some(c),
            _ => None,
        }
    }
}

impl fmt::Display for SnVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SnVerdict::StronglyNormalising {
                max_path_len,
                graph_size,
            } => {
                write!(
                    f,
                    "strongly normalising: longest path {max_path_len}, {graph_size} classes"
                )
            }
            SnVerdict::Diverges(Divergence::Cycle(c)) => {
                write!(f, "diverges: cycle of length {}", c.len())
            }
            SnVerdict::Diverges(Divergence::Fuel { explored }) => {
                write!(f, "inconclusive: fuel exhausted after {explored} classes")
            }
        }
    }
}

/// The classes one step away from `key`, in redex order, without repeats.
pub fn successors(key: &Expr, base: Base, res: Res) -> Vec<Expr> {
    let mut out: Vec<Expr> = Vec::new();
    for r in redexes(key, base, res) {
        let mut supply = Supply::above(key);
        let next = step(key, &r, base, res, &mut supply).expect("enumerated redex applies");
        let k = class_key(&next);
        if !out.contains(&k) {
            out.push(k);
        }
    }
    out
}

enum Mark {
    OnStack(usize),
    Done(usize),
}

struct Frame {
    key: Expr,
    succs: Vec<Expr>,
    next: usize,
    best: usize,
}

/// Total number of syntax nodes the search may hold, successors included;
/// past it the verdict is inconclusive, as with an exhausted class budget.
/// Terms that copy a growing subterm reach it long before the class budget.
pub const NODE_BUDGET: usize = 1_000_000;

/// Largest single class the search will expand.
pub const CLASS_NODES: usize = 20_000;

/// Explore every reduction from `e` modulo the equivalence, with at most
/// `fuel` classes. Equivalence moves are free: nodes are whole classes.
pub fn is_sn(e: &Expr, base: Base, res: Res, fuel: usize) -> SnVerdict {
    let root = class_key(e);
    let mut marks: HashMap<Expr, Mark> = HashMap::new();
    marks.insert(root.clone(), Mark::OnStack(0));
    let succs = successors(&root, base, res);
    let mut held = root.node_count() + succs.iter().map(Expr::node_count).sum::<usize>();
    let mut stack = vec![Frame {
        succs,
        key: root.clone(),
        next: 0,
        best: 0,
    }];
    while let Some(top) = stack.last_mut() {
        if top.next == top.succs.len() {
            let done = stack.pop().unwrap();
            marks.insert(done.key, Mark::Done(done.best));
            if let Some(parent) = stack.last_mut() {
                parent.best = parent.best.max(done.best + 1);
            }
            continue;
        }
        let s = top.succs[top.next].clone();
        top.next += 1;
        match marks.get(&s) {
            Some(Mark::OnStack(i)) => {
                let cycle = stack[*i..].iter().map(|f| f.key.clone()).collect();
                return SnVerdict::Diverges(Divergence::Cycle(cycle));
            }
            Some(Mark::Done(l)) => {
                let l = *l;
                top.best = top.best.max(l + 1);
            }
            None => {
                if marks.len() >= fuel || held > NODE_BUDGET || s.node_count() > CLASS_NODES {
                    return SnVerdict::Diverges(Divergence::Fuel {
                        explored: marks.len(),
                    });
                }
                marks.insert(s.clone(), Mark::OnStack(stack.len()));
                let succs = successors(&s, base, res);
                held += succs.iter().map(Expr::node_count).sum::<usize>();
                stack.push(Frame {
                    key: s,
                    succs,
                    next: 0,
                    best: 0,
                });
            }
        }
    }
    let max_path_len = match marks.get(&root) {
        Some(Mark::Done(l)) => *l,
        _ => unreachable!("the root is finished last"),
    };
    SnVerdict::StronglyNormalising {
        max_path_len,
        graph_size: marks.len(),
    }
}
