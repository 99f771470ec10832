//! Weighted MaxCut instances, the `n m` / `u v w` edge-list format used by
//! the Biq Mac library, and seeded random generators.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};

/// Undirected edge with 1-based endpoints, `u < v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
}

impl Graph {
    /// Validates and normalizes `(u, v)` so that `u < v`.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize, i64)>) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for (a, b, weight) in edges {
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop on vertex {a}")));
            }
            let (u, v) = if a < b { (a, b) } else { (b, a) };
            if u < 1 || v > n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({a}, {b}) outside 1..={n}"
                )));
            }
            if !seen.insert((u, v)) {
                return Err(Error::InvalidGraph(format!("duplicate edge ({u}, {v})")));
            }
            out.push(Edge { u, v, weight });
        }
        Ok(Self { n, edges: out })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn total_weight(&self) -> i64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    pub fn max_abs_weight(&self) -> i64 {
        self.edges.iter().map(|e| e.weight.abs()).max().unwrap_or(0)
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n];
        for e in &self.edges {
            d[e.u - 1] += 1;
            d[e.v - 1] += 1;
        }
        d
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut adj = vec![vec![]; self.n];
        for e in &self.edges {
            adj[e.u - 1].push(e.v - 1);
            adj[e.v - 1].push(e.u - 1);
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(x) = stack.pop() {
            for &y in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Ising energy `sum w_ij z_i z_j` with `z = 1 - 2 b`.
    pub fn energy(&self, bits: &BitString) -> i64 {
        self.edges
            .iter()
            .map(|e| e.weight * bits.spin(e.u - 1) * bits.spin(e.v - 1))
            .sum()
    }

    /// Weight of edges crossing the partition.
    pub fn cut_value(&self, bits: &BitString) -> i64 {
        (self.total_weight() - self.energy(bits)) / 2
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hl, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "empty file".into(),
        })?;
        let nums = parse_ints(header, hl)?;
        let [n, m] = nums[..] else {
            return Err(Error::Parse {
                line: hl,
                msg: "header must be \"n m\"".into(),
            });
        };
        if n < 1 || m < 0 {
            return Err(Error::Parse {
                line: hl,
                msg: "header values out of range".into(),
            });
        }
        let mut edges = Vec::with_capacity(m as usize);
        for (ln, line) in lines {
            let nums = parse_ints(line, ln)?;
            let [u, v, w] = nums[..] else {
                return Err(Error::Parse {
                    line: ln,
                    msg: "edge line must be \"u v w\"".into(),
                });
            };
            if u < 1 || v < 1 {
                return Err(Error::Parse {
                    line: ln,
                    msg: "vertices are 1-based".into(),
                });
            }
            edges.push((u as usize, v as usize, w));
        }
        if edges.len() != m as usize {
            return Err(Error::Parse {
                line: hl,
                msg: format!("header promises {m} edges, found {}", edges.len()),
            });
        }
        Self::new(n as usize, edges)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.n, self.edges.len());
        for e in &self.edges {
            let _ = writeln!(s, "{} {} {}", e.u, e.v, e.weight);
        }
        s
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    /// Uniform random simple connected 3-regular graph: configuration
    /// (pairing) model, rejecting loops, multi-edges and disconnected draws.
    pub fn random_3_regular<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        Self::random_regular(n, 3, rng)
    }

    pub fn random_regular<R: Rng + ?Sized>(n: usize, degree: usize, rng: &mut R) -> Result<Self> {
        if n < 4 || (n * degree) % 2 == 1 || degree >= n {
            return Err(Error::RegularParity(n));
        }
        let mut points: Vec<usize> = (0..n)
            .flat_map(|v| std::iter::repeat_n(v, degree))
            .collect();
        'attempt: loop {
            points.shuffle(rng);
            let mut seen = HashSet::new();
            for pair in points.chunks(2) {
                let (a, b) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
                if a == b || !seen.insert((a, b)) {
                    continue 'attempt;
                }
            }
            let mut edges: Vec<_> = seen.into_iter().map(|(a, b)| (a + 1, b + 1, 1)).collect();
            edges.sort_unstable();
            let g = Self::new(n, edges)?;
            if g.is_connected() {
                return Ok(g);
            }
        }
    }

    /// G(n, p) with unit weights.
    pub fn erdos_renyi<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidGraph(format!(
                "edge probability {p} outside [0, 1]"
            )));
        }
        let mut edges = vec![];
        for u in 1..=n {
            for v in u + 1..=n {
                if rng.gen_bool(p) {
                    edges.push((u, v, 1));
                }
            }
        }
        Self::new(n, edges)
    }
}

fn parse_ints(line: &str, ln: usize) -> Result<Vec<i64>> {
    line.split_whitespace()
        .map(|t| {
            t.parse::<i64>().map_err(|_| Error::Parse {
                line: ln,
                msg: format!("not an integer: {t:?}"),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn parse_examples() {
        let g = Graph::parse("2 1\n1 2 1").unwrap();
        assert_eq!(g.n(), 2);
        assert_eq!(
            g.edges(),
            &[Edge {
                u: 1,
                v: 2,
                weight: 1
            }]
        );

        assert!(matches!(
            Graph::parse("3 1\n1 1 1"),
            Err(Error::InvalidGraph(_))
        ));
        assert!(matches!(
            Graph::parse("3 2\n1 2 1\n2 1 1"),
            Err(Error::InvalidGraph(_))
        ));
        assert!(matches!(
            Graph::parse("3 1\n1 4 1"),
            Err(Error::InvalidGraph(_))
        ));
        assert!(matches!(
            Graph::parse("3\n1 2 1"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            Graph::parse("3 2\n1 2 1"),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            Graph::parse("3 1\n1 2"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(Graph::parse(""), Err(Error::Parse { .. })));
    }

    #[test]
    fn k4_is_the_only_cubic_graph_on_four_vertices() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = Graph::random_3_regular(4, &mut rng).unwrap();
        assert_eq!(g.edges().len(), 6);
        assert!(g.degrees().iter().all(|&d| d == 3));
    }

    #[test]
    fn cubic_generation_is_seeded_and_regular() {
        let a = Graph::random_3_regular(6, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        let b = Graph::random_3_regular(6, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        assert_eq!(a, b);
        assert!(a.degrees().iter().all(|&d| d == 3));
        assert!(a.is_connected());
        assert!(matches!(
            Graph::random_3_regular(5, &mut ChaCha8Rng::seed_from_u64(0)),
            Err(Error::RegularParity(5))
        ));
    }

    #[test]
    fn erdos_renyi_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(Graph::erdos_renyi(5, 0.0, &mut rng)
            .unwrap()
            .edges()
            .is_empty());
        assert_eq!(
            Graph::erdos_renyi(5, 1.0, &mut rng).unwrap().edges().len(),
            10
        );
    }

    #[test]
    fn cut_and_energy() {
        let tri = Graph::new(3, [(1, 2, 1), (2, 3, 1), (1, 3, 1)]).unwrap();
        let b: BitString = "100".parse().unwrap();
        assert_eq!(tri.energy(&b), -1);
        assert_eq!(tri.cut_value(&b), 2);
    }

    proptest! {
        #[test]
        fn text_round_trip(seed in any::<u64>(), n in 2usize..30, p in 0.0f64..1.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut g = Graph::erdos_renyi(n, p, &mut rng).unwrap();
            for (k, e) in g.edges.iter_mut().enumerate() {
                e.weight = k as i64 % 7 - 3;
            }
            prop_assert_eq!(Graph::parse(&g.to_text()).unwrap(), g);
        }
    }
}
