//! The layout problem as an integer linear program, written in CPLEX LP format
//! so that an external MILP solver can cross-check the DP.
//!
//! Variables: `d_i_j` binary successor flags, `g_i` integer positions, and two
//! helper binaries for the linearizations: `y_i_j` picks which side of the
//! "not a successor" disjunction holds, `z_i_j` orders the pair `i < j`.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{LayoutOrder, WeightMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearConstraint {
    pub name: String,
    pub terms: Vec<(i64, String)>,
    pub sense: Sense,
    pub rhs: i64,
}

impl LinearConstraint {
    fn holds(&self, value: &HashMap<String, i64>) -> bool {
        let lhs: i64 = self
            .terms
            .iter()
            .map(|(c, v)| c * value.get(v).copied().unwrap_or(0))
            .sum();
        match self.sense {
            Sense::Le => lhs <= self.rhs,
            Sense::Ge => lhs >= self.rhs,
            Sense::Eq => lhs == self.rhs,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IlpModel {
    pub n: usize,
    pub big_m: i64,
    pub objective: Vec<(i64, String)>,
    pub constraints: Vec<LinearConstraint>,
    pub bounds: Vec<(String, i64, i64)>,
    pub binaries: Vec<String>,
    pub generals: Vec<String>,
}

fn d(i: usize, j: usize) -> String {
    format!("d_{i}_{j}")
}
fn g(i: usize) -> String {
    format!("g_{i}")
}
fn y(i: usize, j: usize) -> String {
    format!("y_{i}_{j}")
}
fn z(i: usize, j: usize) -> String {
    format!("z_{i}_{j}")
}

impl IlpModel {
    pub fn from_weights(w: &WeightMatrix) -> Self {
        let n = w.len();
        let big_m = n as i64 + 1;
        let mut c = Vec::new();
        let mut push = |name: String, terms: Vec<(i64, String)>, sense, rhs| {
            c.push(LinearConstraint {
                name,
                terms,
                sense,
                rhs,
            })
        };

        for i in 0..n {
            push(format!("no_self_{i}"), vec![(1, d(i, i))], Sense::Eq, 0);
        }
        for i in 0..n {
            let terms = (0..n).map(|j| (1, d(i, j))).collect();
            push(format!("one_next_{i}"), terms, Sense::Le, 1);
        }
        for j in 0..n {
            let terms = (0..n).map(|i| (1, d(i, j))).collect();
            push(format!("one_prev_{j}"), terms, Sense::Le, 1);
        }
        let all = (0..n).flat_map(|i| (0..n).map(move |j| (1, d(i, j)))).collect();
        push("chain_length".into(), all, Sense::Eq, n as i64 - 1);

        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let gap = |extra: Vec<(i64, String)>| {
                    let mut t = vec![(1, g(j)), (-1, g(i))];
                    t.extend(extra);
                    t
                };
                // d = 1  =>  g_j - g_i = 1
                push(
                    format!("succ_lo_{i}_{j}"),
                    gap(vec![(-big_m, d(i, j))]),
                    Sense::Ge,
                    1 - big_m,
                );
                push(
                    format!("succ_hi_{i}_{j}"),
                    gap(vec![(big_m, d(i, j))]),
                    Sense::Le,
                    1 + big_m,
                );
                // d = 0  =>  g_j - g_i <= 0 (y = 0) or g_j - g_i >= 2 (y = 1)
                push(
                    format!("nsucc_lo_{i}_{j}"),
                    gap(vec![(-big_m, y(i, j)), (-big_m, d(i, j))]),
                    Sense::Le,
                    0,
                );
                push(
                    format!("nsucc_hi_{i}_{j}"),
                    gap(vec![(-big_m, y(i, j)), (big_m, d(i, j))]),
                    Sense::Ge,
                    2 - big_m,
                );
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                // |g_i - g_j| >= 1
                push(
                    format!("distinct_a_{i}_{j}"),
                    vec![(1, g(i)), (-1, g(j)), (big_m, z(i, j))],
                    Sense::Ge,
                    1,
                );
                push(
                    format!("distinct_b_{i}_{j}"),
                    vec![(1, g(j)), (-1, g(i)), (-big_m, z(i, j))],
                    Sense::Ge,
                    1 - big_m,
                );
            }
        }

        let objective = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| i != j && w.get(i, j) > 0)
            .map(|(i, j)| (i64::from(w.get(i, j)), d(i, j)))
            .collect();
        let bounds = (0..n).map(|i| (g(i), 0, n as i64 - 1)).collect();
        let mut binaries: Vec<String> = (0..n).flat_map(|i| (0..n).map(move |j| d(i, j))).collect();
        binaries.extend((0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| y(i, j))));
        binaries.extend((0..n).flat_map(|i| (i + 1..n).map(move |j| z(i, j))));
        let generals = (0..n).map(g).collect();

        IlpModel {
            n,
            big_m,
            objective,
            constraints: c,
            bounds,
            binaries,
            generals,
        }
    }

    /// Variable values implied by a layout.
    pub fn assignment(&self, layout: &LayoutOrder) -> HashMap<String, i64> {
        let n = self.n;
        let gm = &layout.gamma;
        let mut v = HashMap::new();
        for i in 0..n {
            v.insert(g(i), gm[i] as i64);
            for j in 0..n {
                let gap = gm[j] as i64 - gm[i] as i64;
                v.insert(d(i, j), i64::from(i != j && gap == 1));
                if i != j {
                    v.insert(y(i, j), i64::from(gap >= 2));
                }
                if i < j {
                    v.insert(z(i, j), i64::from(gap > 0));
                }
            }
        }
        v
    }

    /// Names of violated constraints and bounds.
    pub fn violations(&self, value: &HashMap<String, i64>) -> Vec<String> {
        let mut bad: Vec<String> = self
            .constraints
            .iter()
            .filter(|c| !c.holds(value))
            .map(|c| c.name.clone())
            .collect();
        for (var, lo, hi) in &self.bounds {
            let x = value.get(var).copied().unwrap_or(0);
            if x < *lo || x > *hi {
                bad.push(format!("bound {var}"));
            }
        }
        for var in &self.binaries {
            if !matches!(value.get(var).copied().unwrap_or(0), 0 | 1) {
                bad.push(format!("binary {var}"));
            }
        }
        bad
    }

    pub fn objective_value(&self, value: &HashMap<String, i64>) -> i64 {
        self.objective
            .iter()
            .map(|(c, v)| c * value.get(v).copied().unwrap_or(0))
            .sum()
    }

    pub fn to_lp(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "\\ MARS layout: maximize adjacent MARS read by a common consumer");
        let _ = writeln!(out, "\\ n = {}, big-M = {}", self.n, self.big_m);
        out.push_str("Maximize\n obj:");
        if self.objective.is_empty() {
            // LP needs at least one term
            match self.generals.first() {
                Some(v) => {
                    let _ = write!(out, " 0 {v}");
                }
                None => out.push_str(" 0 dummy"),
            }
        }
        write_terms(&mut out, &self.objective);
        out.push_str("\nSubject To\n");
        for c in &self.constraints {
            let _ = write!(out, " {}:", c.name);
            write_terms(&mut out, &c.terms);
            let op = match c.sense {
                Sense::Le => "<=",
                Sense::Ge => ">=",
                Sense::Eq => "=",
            };
            let _ = writeln!(out, " {op} {}", c.rhs);
        }
        out.push_str("Bounds\n");
        for (v, lo, hi) in &self.bounds {
            let _ = writeln!(out, " {lo} <= {v} <= {hi}");
        }
        if !self.binaries.is_empty() {
            out.push_str("Binaries\n");
            for chunk in self.binaries.chunks(8) {
                let _ = writeln!(out, " {}", chunk.join(" "));
            }
        }
        if !self.generals.is_empty() {
            out.push_str("Generals\n");
            for chunk in self.generals.chunks(8) {
                let _ = writeln!(out, " {}", chunk.join(" "));
            }
        }
        out.push_str("End\n");
        out
    }
}

fn write_terms(out: &mut String, terms: &[(i64, String)]) {
    for (k, (c, v)) in terms.iter().enumerate() {
        let sign = if *c < 0 {
            "-"
        } else if k > 0 {
            "+"
        } else {
            ""
        };
        if sign.is_empty() {
            let _ = write!(out, " {} {v}", c.abs());
        } else {
            let _ = write!(out, " {sign} {} {v}", c.abs());
        }
    }
}

/// LP text of the layout model for `w`.
pub fn export_ilp(w: &WeightMatrix) -> String {
    IlpModel::from_weights(w).to_lp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::solve_layout_exact;

    #[test]
    fn variable_counts() {
        let w = WeightMatrix::from_rows(&[vec![0, 0, 1, 1], vec![0, 0, 1, 1], vec![1, 1, 0, 2], vec![1, 1, 2, 0]]);
        let m = IlpModel::from_weights(&w);
        assert_eq!(m.binaries.iter().filter(|v| v.starts_with("d_")).count(), 16);
        assert_eq!(m.generals.len(), 4);
        let lp = m.to_lp();
        assert!(lp.starts_with("\\ MARS layout"));
        assert!(lp.contains("chain_length:"));
        assert!(lp.trim_end().ends_with("End"));
    }

    #[test]
    fn dp_solution_satisfies_every_constraint() {
        let w = WeightMatrix::from_rows(&[
            vec![0, 3, 0, 1, 2],
            vec![3, 0, 1, 0, 0],
            vec![0, 1, 0, 4, 1],
            vec![1, 0, 4, 0, 2],
            vec![2, 0, 1, 2, 0],
        ]);
        let layout = solve_layout_exact(&w).unwrap();
        let m = IlpModel::from_weights(&w);
        let a = m.assignment(&layout);
        assert!(m.violations(&a).is_empty(), "{:?}", m.violations(&a));
        assert_eq!(m.objective_value(&a), i64::from(layout.objective));
    }

    #[test]
    fn non_permutation_is_rejected() {
        let w = WeightMatrix::zeros(3);
        let m = IlpModel::from_weights(&w);
        let mut a = m.assignment(&LayoutOrder::identity(&w));
        a.insert("g_2".into(), 1);
        assert!(!m.violations(&a).is_empty());
    }

    #[test]
    fn single_mars_model() {
        let m = IlpModel::from_weights(&WeightMatrix::zeros(1));
        let lp = m.to_lp();
        assert!(lp.contains("obj: 0 g_0"));
        let a = m.assignment(&LayoutOrder::identity(&WeightMatrix::zeros(1)));
        assert!(m.violations(&a).is_empty());
    }
}
