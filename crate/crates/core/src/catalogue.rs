//! Named graph families and their closed-form Laplacian spectra.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::hamming;

/// Families understood by [`named_graph`].
pub const FAMILIES: &[&str] =
    &["complete", "complete_multipartite", "cycle", "petersen", "coxeter", "kneser", "hamming"];

/// Coxeter graph: the 28 three-subsets of {0..6} that are not lines of the
/// Fano plane {013, 124, 235, 346, 045, 156, 026}, adjacent when disjoint.
/// Vertices are numbered in lexicographic order of those subsets.
const COXETER_EDGES: [(usize, usize); 42] = [
    (0, 25),
    (0, 26),
    (0, 27),
    (1, 21),
    (1, 24),
    (1, 26),
    (2, 20),
    (2, 21),
    (2, 23),
    (3, 20),
    (3, 22),
    (3, 25),
    (4, 18),
    (4, 19),
    (4, 27),
    (5, 16),
    (5, 17),
    (5, 26),
    (6, 15),
    (6, 17),
    (6, 19),
    (7, 13),
    (7, 14),
    (7, 24),
    (8, 14),
    (8, 19),
    (8, 23),
    (9, 13),
    (9, 18),
    (9, 22),
    (10, 12),
    (10, 13),
    (10, 16),
    (11, 12),
    (11, 15),
    (11, 20),
    (12, 27),
    (14, 25),
    (15, 24),
    (16, 23),
    (17, 22),
    (18, 21),
];

/// Builds a member of a named family. Parameters per family:
///
/// | name | params |
/// |------|--------|
/// | `complete` | `n` |
/// | `complete_multipartite` | `k m` (k classes of size m) |
/// | `cycle` | `n` (n ≥ 3) |
/// | `petersen`, `coxeter` | none |
/// | `kneser` | `n s` (2s ≤ n) |
/// | `hamming` | `d q j` |
pub fn named_graph(name: &str, params: &[usize]) -> Result<Graph> {
    let want = |count: usize| -> Result<()> {
        if params.len() == count {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("{name} expects {count} parameter(s), got {}", params.len())))
        }
    };
    match name {
        "complete" => {
            want(1)?;
            complete(params[0])
        }
        "complete_multipartite" => {
            want(2)?;
            complete_multipartite(params[0], params[1])
        }
        "cycle" => {
            want(1)?;
            cycle(params[0])
        }
        "petersen" => {
            want(0)?;
            petersen()
        }
        "coxeter" => {
            want(0)?;
            coxeter()
        }
        "kneser" => {
            want(2)?;
            kneser(params[0], params[1])
        }
        "hamming" => {
            want(3)?;
            hamming::hamming_graph(params[0], params[1], params[2])
        }
        other => Err(Error::UnknownFamily(other.to_string())),
    }
}

pub fn complete(n: usize) -> Result<Graph> {
    if n == 0 {
        return Err(Error::InvalidParameter("complete graph needs n >= 1".into()));
    }
    let edges: Vec<_> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    Ok(Graph::from_unit_edges(n, &edges)?.with_name(format!("K{n}")))
}

/// K_{k×m}: k classes of m vertices each; vertex v lies in class v / m.
pub fn complete_multipartite(k: usize, m: usize) -> Result<Graph> {
    if k == 0 || m == 0 {
        return Err(Error::InvalidParameter("complete multipartite graph needs k, m >= 1".into()));
    }
    let n = k * m;
    let edges: Vec<_> = (0..n).flat_map(|i| (i + 1..n).filter(move |j| i / m != j / m).map(move |j| (i, j))).collect();
    Ok(Graph::from_unit_edges(n, &edges)?.with_name(format!("K{k}x{m}")))
}

pub fn cycle(n: usize) -> Result<Graph> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("cycle needs n >= 3, got {n}")));
    }
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    Ok(Graph::from_unit_edges(n, &edges)?.with_name(format!("C{n}")))
}

pub fn petersen() -> Result<Graph> {
    Ok(kneser(5, 2)?.with_name("petersen"))
}

pub fn coxeter() -> Result<Graph> {
    let g = Graph::from_unit_edges(28, &COXETER_EDGES)?.with_name("coxeter");
    debug_assert_eq!(g.regular_degree(), Some(3.0));
    Ok(g)
}

/// All `s`-subsets of `0..n` in lexicographic order.
pub(crate) fn subsets(n: usize, s: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if s > n {
        return out;
    }
    let mut current: Vec<usize> = (0..s).collect();
    loop {
        out.push(current.clone());
        let Some(i) = (0..s).rev().find(|&i| current[i] < n - s + i) else {
            return out;
        };
        current[i] += 1;
        for t in i + 1..s {
            current[t] = current[t - 1] + 1;
        }
    }
}

/// Kneser graph K(n, s): `s`-subsets of an `n`-set, adjacent when disjoint.
pub fn kneser(n: usize, s: usize) -> Result<Graph> {
    if s == 0 || 2 * s > n {
        return Err(Error::InvalidParameter(format!("kneser needs 1 <= s and 2s <= n, got n={n}, s={s}")));
    }
    let sets = subsets(n, s);
    let mut edges = Vec::new();
    for (a, x) in sets.iter().enumerate() {
        for (b, y) in sets.iter().enumerate().skip(a + 1) {
            if x.iter().all(|v| !y.contains(v)) {
                edges.push((a, b));
            }
        }
    }
    Ok(Graph::from_unit_edges(sets.len(), &edges)?.with_name(format!("kneser({n},{s})")))
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Sorts and merges `(value, multiplicity)` pairs whose values agree to 1e-12.
fn group(mut pairs: Vec<(f64, usize)>) -> Vec<(f64, usize)> {
    pairs.retain(|(_, m)| *m > 0);
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, usize)> = Vec::new();
    for (v, m) in pairs {
        match out.last_mut() {
            Some(last) if (last.0 - v).abs() <= 1e-12 => last.1 += m,
            _ => out.push((v, m)),
        }
    }
    out
}

/// Closed-form Laplacian spectrum `(value, multiplicity)` in ascending order,
/// for the families where it is known. `None` for unknown families.
pub fn known_laplacian_spectrum(name: &str, params: &[usize]) -> Option<Vec<(f64, usize)>> {
    let spectrum = match (name, params) {
        ("complete", &[n]) => vec![(0.0, 1), (n as f64, n - 1)],
        ("complete_multipartite", &[k, m]) => {
            let n = k * m;
            vec![(0.0, 1), (n as f64, k - 1), ((n - m) as f64, k * (m - 1))]
        }
        ("cycle", &[n]) => (0..n).map(|t| (2.0 - 2.0 * (2.0 * PI * t as f64 / n as f64).cos(), 1)).collect(),
        ("petersen", &[]) => vec![(0.0, 1), (2.0, 5), (5.0, 4)],
        ("coxeter", &[]) => {
            let r2 = 2f64.sqrt();
            // Adjacency eigenvalues 3, 2, √2−1, −1, −1−√2 with multiplicities 1, 8, 6, 7, 6.
            vec![(0.0, 1), (1.0, 8), (4.0 - r2, 6), (4.0, 7), (4.0 + r2, 6)]
        }
        ("kneser", &[n, s]) => {
            let degree = binomial(n - s, s) as f64;
            (0..=s)
                .map(|i| {
                    let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                    let theta = sign * binomial(n - s - i, s - i) as f64;
                    let mult = binomial(n, i) - if i == 0 { 0 } else { binomial(n, i - 1) };
                    (degree - theta, mult)
                })
                .collect()
        }
        ("hamming", &[d, q, j]) => {
            let table = hamming::KravchukTable::new(d, q).ok()?;
            let degree = table.value_f64(j, 0);
            (0..=d).map(|i| (degree - table.value_f64(j, i), table.multiplicity_usize(i))).collect()
        }
        _ => return None,
    };
    Some(group(spectrum))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_sizes() {
        let k5 = named_graph("complete", &[5]).unwrap();
        assert_eq!((k5.n(), k5.edge_count()), (5, 10));
        let k32 = named_graph("complete_multipartite", &[3, 2]).unwrap();
        assert_eq!((k32.n(), k32.edge_count()), (6, 12));
        let cox = named_graph("coxeter", &[]).unwrap();
        assert_eq!((cox.n(), cox.edge_count()), (28, 42));
        assert_eq!(cox.regular_degree(), Some(3.0));
        let pet = named_graph("petersen", &[]).unwrap();
        assert_eq!((pet.n(), pet.edge_count()), (10, 15));
        let kn = named_graph("kneser", &[6, 2]).unwrap();
        assert_eq!((kn.n(), kn.edge_count()), (15, 45));
    }

    #[test]
    fn coxeter_has_girth_seven() {
        // No triangles, 4-, 5- or 6-cycles: check via BFS distance layers.
        let g = coxeter().unwrap();
        for s in 0..g.n() {
            let mut dist = vec![usize::MAX; g.n()];
            let mut parent = vec![usize::MAX; g.n()];
            dist[s] = 0;
            let mut queue = std::collections::VecDeque::from([s]);
            while let Some(v) = queue.pop_front() {
                for u in g.neighbors(v) {
                    if dist[u] == usize::MAX {
                        dist[u] = dist[v] + 1;
                        parent[u] = v;
                        queue.push_back(u);
                    } else if parent[v] != u {
                        assert!(dist[u] + dist[v] + 1 >= 7, "short cycle through {s}");
                    }
                }
            }
        }
    }

    #[test]
    fn bad_parameters() {
        assert!(matches!(named_graph("kneser", &[3, 2]), Err(Error::InvalidParameter(_))));
        assert!(matches!(named_graph("dodecahedron", &[]), Err(Error::UnknownFamily(_))));
        assert!(named_graph("cycle", &[2]).is_err());
        assert!(named_graph("complete", &[]).is_err());
    }

    #[test]
    fn subsets_enumeration() {
        assert_eq!(subsets(4, 2).len(), 6);
        assert_eq!(subsets(5, 0), vec![Vec::<usize>::new()]);
        assert_eq!(subsets(3, 3), vec![vec![0, 1, 2]]);
        assert_eq!(subsets(4, 2)[1], vec![0, 2]);
    }

    #[test]
    fn known_spectra_sum_to_n() {
        for (name, params) in [
            ("complete", vec![6]),
            ("complete_multipartite", vec![3, 2]),
            ("cycle", vec![7]),
            ("petersen", vec![]),
            ("coxeter", vec![]),
            ("kneser", vec![6, 2]),
            ("hamming", vec![3, 3, 2]),
        ] {
            let g = named_graph(name, &params).unwrap();
            let spec = known_laplacian_spectrum(name, &params).unwrap();
            assert_eq!(spec.iter().map(|p| p.1).sum::<usize>(), g.n(), "{name}");
            // Trace of L equals the degree sum.
            let trace: f64 = spec.iter().map(|(v, m)| v * *m as f64).sum();
            assert!((trace - 2.0 * g.total_weight()).abs() < 1e-9, "{name}");
        }
    }
}
