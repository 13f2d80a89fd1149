use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Angle data attached to one edge `Q_i ∩ Q_j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeBound {
    pub faces: (usize, usize),
    /// Upper bound `α_ij` on the dihedral angle, radians.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Reflection denominator: the angle `π/k_ij`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
}

/// Faces, adjacency and angle metadata of a cornered domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CombinatorialScheme {
    pub faces: Vec<String>,
    /// Unordered adjacent pairs.
    pub adjacency: Vec<(usize, usize)>,
    pub depth: usize,
    /// Opposite-face pairs for cubical schemes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub opposite: Option<Vec<(usize, usize)>>,
    #[serde(default)]
    pub edges: Vec<EdgeBound>,
    /// Declared cosimplicial (metadata only).
    #[serde(default)]
    pub cosimplicial: bool,
}

impl CombinatorialScheme {
    pub fn validate(&self) -> Result<()> {
        let nf = self.faces.len();
        let mut seen = std::collections::BTreeSet::new();
        for &(i, j) in &self.adjacency {
            if i >= nf || j >= nf {
                return Err(Error::Invalid(format!("adjacency ({i},{j}) references a missing face")));
            }
            if i == j {
                return Err(Error::Invalid(format!("face {i} is adjacent to itself")));
            }
            if !seen.insert((i.min(j), i.max(j))) {
                return Err(Error::Invalid(format!("adjacency ({i},{j}) listed twice")));
            }
        }
        if let Some(op) = &self.opposite {
            if nf != 2 * self.depth || op.len() != self.depth {
                return Err(Error::Invalid(format!(
                    "cubical scheme of depth {} needs {} faces in {} opposite pairs",
                    self.depth,
                    2 * self.depth,
                    self.depth
                )));
            }
            let mut used = vec![false; nf];
            for &(i, j) in op {
                if i >= nf || j >= nf || i == j || used[i] || used[j] {
                    return Err(Error::Invalid("opposite pairs must be disjoint and cover all faces".into()));
                }
                if self.adjacent(i, j) {
                    return Err(Error::Invalid(format!("opposite faces {i} and {j} are marked adjacent")));
                }
                used[i] = true;
                used[j] = true;
            }
        }
        for e in &self.edges {
            if !self.adjacent(e.faces.0, e.faces.1) {
                return Err(Error::Invalid(format!("angle bound on non-adjacent pair {:?}", e.faces)));
            }
            if e.k == Some(0) {
                return Err(Error::Invalid("reflection denominator must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        self.adjacency.iter().any(|&(a, b)| (a, b) == (i, j) || (a, b) == (j, i))
    }

    /// Reflection angle `π/k_ij` when declared.
    pub fn gamma_angle(&self, i: usize, j: usize) -> Option<f64> {
        self.edges
            .iter()
            .find(|e| e.faces == (i, j) || e.faces == (j, i))
            .and_then(|e| e.k)
            .map(|k| std::f64::consts::PI / k as f64)
    }

    /// Prism over a `k`-gon: faces `side-0 … side-(k−1)`, `bottom`, `top`.
    pub fn prism(k: usize) -> Self {
        let mut faces: Vec<String> = (0..k).map(|i| format!("side-{i}")).collect();
        faces.push("bottom".into());
        faces.push("top".into());
        let mut adjacency = Vec::new();
        for i in 0..k {
            adjacency.push((i, (i + 1) % k));
            adjacency.push((i, k));
            adjacency.push((i, k + 1));
        }
        CombinatorialScheme { faces, adjacency, depth: 3, opposite: None, edges: vec![], cosimplicial: k == 3 }
    }

    /// Cube as the prism over a rectangle, with opposite pairs and all `k_ij = 2`.
    pub fn cube() -> Self {
        let mut s = Self::prism(4);
        s.opposite = Some(vec![(0, 2), (1, 3), (4, 5)]);
        s.edges = s.adjacency.iter().map(|&f| EdgeBound { faces: f, alpha: None, k: Some(2) }).collect();
        s.cosimplicial = true;
        s
    }
}

/// Radical inverse of `i` in base `b`.
pub fn radical_inverse(mut i: u64, b: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= b as f64;
        r += f * (i % b) as f64;
        i /= b;
    }
    r
}

/// First `count` points of the 2-dimensional Halton sequence (bases 2, 3), skipping index 0.
pub fn halton2(count: usize) -> Vec<[f64; 2]> {
    (1..=count as u64).map(|i| [radical_inverse(i, 2), radical_inverse(i, 3)]).collect()
}
