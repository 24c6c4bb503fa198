//! Symmetric simplex quadrature in barycentric coordinates.

/// Points are barycentric (`d + 1` coordinates, trailing entries zero);
/// weights sum to one so a rule is applied as `|T| Σ w_q f(x_q)`.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub dim: usize,
    pub degree: usize,
    pub points: Vec<[f64; 4]>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    /// Degree-4 rule on triangles (6 points).
    pub fn triangle_degree4() -> Self {
        let mut points = Vec::with_capacity(6);
        let mut weights = Vec::with_capacity(6);
        for (a, w) in [
            (0.445_948_490_915_964_886, 0.223_381_589_678_011_466),
            (0.091_576_213_509_770_743, 0.109_951_743_655_321_868),
        ] {
            let b = 1.0 - 2.0 * a;
            for p in [[b, a, a, 0.0], [a, b, a, 0.0], [a, a, b, 0.0]] {
                points.push(p);
                weights.push(w);
            }
        }
        normalise(2, 4, points, weights)
    }

    /// Degree-5 rule on tetrahedra (14 points).
    pub fn tetrahedron_degree5() -> Self {
        let mut points = Vec::with_capacity(14);
        let mut weights = Vec::with_capacity(14);
        for (a, w) in [
            (0.092_735_250_310_891_2, 0.012_248_840_519_393_66),
            (0.310_885_919_263_300_6, 0.018_781_320_953_002_64),
        ] {
            let b = 1.0 - 3.0 * a;
            for k in 0..4 {
                let mut p = [a; 4];
                p[k] = b;
                points.push(p);
                weights.push(w);
            }
        }
        let a = 0.045_503_704_125_649_6;
        let b = 0.5 - a;
        let w = 0.007_091_003_462_846_911;
        for (i, j) in [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)] {
            let mut p = [a; 4];
            p[i] = b;
            p[j] = b;
            points.push(p);
            weights.push(w);
        }
        normalise(3, 5, points, weights)
    }

    /// Default rule for assembly on a `dim`-simplex.
    pub fn for_dim(dim: usize) -> Self {
        if dim == 2 {
            Self::triangle_degree4()
        } else {
            Self::tetrahedron_degree5()
        }
    }

    /// Rule on a facet of a `dim`-simplex (used for boundary loads).
    pub fn facet(dim: usize) -> Self {
        if dim == 2 {
            // 3-point Gauss on an edge, barycentric (s, 1-s)
            let g = (0.6f64).sqrt() / 2.0;
            let pts = [0.5 - g, 0.5, 0.5 + g];
            let ws = [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0];
            let points = pts.iter().map(|&s| [s, 1.0 - s, 0.0, 0.0]).collect();
            QuadratureRule {
                dim: 1,
                degree: 5,
                points,
                weights: ws.to_vec(),
            }
        } else {
            let mut r = Self::triangle_degree4();
            r.dim = 2;
            r
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

fn normalise(dim: usize, degree: usize, points: Vec<[f64; 4]>, weights: Vec<f64>) -> QuadratureRule {
    let total: f64 = weights.iter().sum();
    QuadratureRule {
        dim,
        degree,
        points,
        weights: weights.iter().map(|w| w / total).collect(),
    }
}
