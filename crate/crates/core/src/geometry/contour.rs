//! Oriented contours and composite Gauss-Legendre quadrature of `∫ f(ξ) dξ`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::{finite, CPoint, CircArc, Rhomb};
use crate::error::{geometry, Error, Result};

/// `(P_n(x), P_{n-1}(x))` by the three-term recurrence.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    (p1, p0)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, pm1) = legendre_pair(n, x);
            let dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (p, pm1) = legendre_pair(n, x);
        let dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// One smooth oriented piece of a contour.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Piece {
    Arc { arc: CircArc, reversed: bool },
    Segment { a: CPoint, b: CPoint },
}

impl Piece {
    /// Point and derivative at parameter `t ∈ [0, 1]`.
    pub fn eval(&self, t: f64) -> (CPoint, CPoint) {
        match *self {
            Piece::Arc { arc, reversed } => {
                let s = if reversed { 1.0 - t } else { t };
                let sign = if reversed { -1.0 } else { 1.0 };
                let theta = arc.start + s * arc.sweep;
                let e = Complex64::from_polar(arc.radius, theta);
                (arc.center + e, e * Complex64::i() * (sign * arc.sweep))
            }
            Piece::Segment { a, b } => (a + (b - a) * t, b - a),
        }
    }

    pub fn start(&self) -> CPoint {
        self.eval(0.0).0
    }

    pub fn end(&self) -> CPoint {
        self.eval(1.0).0
    }

    pub fn length(&self) -> f64 {
        match self {
            Piece::Arc { arc, .. } => arc.length(),
            Piece::Segment { a, b } => (b - a).norm(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureOptions {
    /// Gauss-Legendre nodes per panel.
    pub nodes: usize,
    pub initial_panels: usize,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_depth: u32,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self { nodes: 16, initial_panels: 4, abs_tol: 1e-14, rel_tol: 1e-13, max_depth: 40 }
    }
}

/// Ordered chain of smooth pieces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    pieces: Vec<Piece>,
    closed: bool,
    pub options: QuadratureOptions,
}

impl Contour {
    pub fn new(pieces: Vec<Piece>, closed: bool) -> Result<Self> {
        if pieces.is_empty() {
            return geometry("contour has no pieces");
        }
        let scale = pieces.iter().map(Piece::length).fold(0.0, f64::max).max(1.0);
        for w in pieces.windows(2) {
            if (w[0].end() - w[1].start()).norm() > 1e-9 * scale {
                return geometry("contour pieces do not connect");
            }
        }
        if closed && (pieces[pieces.len() - 1].end() - pieces[0].start()).norm() > 1e-9 * scale {
            return geometry("contour flagged closed but does not close");
        }
        Ok(Self { pieces, closed, options: QuadratureOptions::default() })
    }

    pub fn with_options(mut self, options: QuadratureOptions) -> Result<Self> {
        if options.nodes < 8 {
            return Err(Error::Parameter("quadrature needs at least 8 nodes per panel".into()));
        }
        self.options = options;
        Ok(self)
    }

    /// Positively oriented circle `∂D(center, radius)`.
    pub fn circle(center: CPoint, radius: f64) -> Result<Self> {
        let arc = CircArc::from_start_sweep(center, radius, 0.0, 2.0 * PI)?;
        Self::new(vec![Piece::Arc { arc, reversed: false }], true)
    }

    /// Closed polygonal contour through the vertices in the given order.
    pub fn polygon(vertices: &[CPoint]) -> Result<Self> {
        let n = vertices.len();
        let pieces = (0..n)
            .map(|i| Piece::Segment { a: vertices[i], b: vertices[(i + 1) % n] })
            .collect();
        Self::new(pieces, true)
    }

    /// Boundary of the rhomb, counterclockwise.
    pub fn rhomb(r: &Rhomb) -> Result<Self> {
        Self::polygon(&r.vertices())
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn length(&self) -> f64 {
        self.pieces.iter().map(Piece::length).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContourIntegral {
    pub value: Complex64,
    /// Sum of node-doubling differences over accepted panels.
    pub error: f64,
    pub evaluations: usize,
}

struct Rule {
    x: Vec<f64>,
    w: Vec<f64>,
}

impl Rule {
    fn panel<F: Fn(CPoint) -> Complex64>(
        &self,
        piece: &Piece,
        idx: usize,
        t0: f64,
        t1: f64,
        f: &F,
        evals: &mut usize,
    ) -> Result<Complex64> {
        let half = 0.5 * (t1 - t0);
        let mid = 0.5 * (t1 + t0);
        let mut acc = Complex64::new(0.0, 0.0);
        for (x, w) in self.x.iter().zip(&self.w) {
            let (z, dz) = piece.eval(mid + half * x);
            let v = f(z);
            *evals += 1;
            if !finite(v) {
                return Err(Error::SingularNode { piece: idx, node: z });
            }
            acc += v * dz * (w * half);
        }
        Ok(acc)
    }
}

/// Adaptive composite Gauss-Legendre quadrature of `∫_Γ f(ξ) dξ`.
///
/// Each panel is compared against the sum over its two halves; the finer
/// value is kept and the difference is the reported error.
pub fn contour_integral<F>(contour: &Contour, integrand: F) -> Result<ContourIntegral>
where
    F: Fn(CPoint) -> Complex64,
{
    let opts = contour.options;
    let (x, w) = gauss_legendre(opts.nodes);
    let rule = Rule { x, w };
    let mut value = Complex64::new(0.0, 0.0);
    let mut error = 0.0;
    let mut evals = 0usize;
    for (idx, piece) in contour.pieces.iter().enumerate() {
        let np = opts.initial_panels.max(1);
        let mut stack: Vec<(f64, f64, u32, Complex64)> = Vec::new();
        for k in (0..np).rev() {
            let t0 = k as f64 / np as f64;
            let t1 = (k + 1) as f64 / np as f64;
            let q = rule.panel(piece, idx, t0, t1, &integrand, &mut evals)?;
            stack.push((t0, t1, 0, q));
        }
        while let Some((t0, t1, depth, coarse)) = stack.pop() {
            let tm = 0.5 * (t0 + t1);
            let left = rule.panel(piece, idx, t0, tm, &integrand, &mut evals)?;
            let right = rule.panel(piece, idx, tm, t1, &integrand, &mut evals)?;
            let fine = left + right;
            let diff = (fine - coarse).norm();
            let tol = opts.abs_tol * (t1 - t0) + opts.rel_tol * fine.norm();
            if diff <= tol || depth >= opts.max_depth {
                value += fine;
                error += diff;
            } else {
                stack.push((tm, t1, depth + 1, right));
                stack.push((t0, tm, depth + 1, left));
            }
        }
    }
    Ok(ContourIntegral { value, error, evaluations: evals })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> CPoint {
        CPoint::new(re, im)
    }

    #[test]
    fn legendre_rule_integrates_polynomials() {
        let (x, w) = gauss_legendre(16);
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        // exact for degree 31
        let m: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(30)).sum();
        assert!((m - 2.0 / 31.0).abs() < 1e-14);
    }

    #[test]
    fn residue_examples() {
        let circ = Contour::circle(c(0.0, 0.0), 1.0).unwrap();
        let r = contour_integral(&circ, |z| 1.0 / z).unwrap();
        assert!((r.value - c(0.0, 2.0 * PI)).norm() < 1e-10);
        let r = contour_integral(&circ, |z| z).unwrap();
        assert!(r.value.norm() < 1e-10);
        let circ = Contour::circle(c(0.3, -0.2), 0.5).unwrap();
        let r = contour_integral(&circ, |z| 1.0 / (z - c(2.0, 1.0))).unwrap();
        assert!(r.value.norm() < 1e-10);
    }

    #[test]
    fn singular_node_reported() {
        let sq = Contour::polygon(&[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 1.0), c(0.0, 1.0)]).unwrap();
        let e = contour_integral(&sq, |z| if z.re == 1.0 { c(f64::NAN, 0.0) } else { z });
        assert!(matches!(e, Err(Error::SingularNode { piece: 1, .. })));
    }

    #[test]
    fn disconnected_pieces_rejected() {
        let p = vec![
            Piece::Segment { a: c(0.0, 0.0), b: c(1.0, 0.0) },
            Piece::Segment { a: c(2.0, 0.0), b: c(3.0, 0.0) },
        ];
        assert!(Contour::new(p, false).is_err());
    }

    #[test]
    fn near_singular_cauchy_integral() {
        // Cauchy formula for a point very close to a rhomb edge
        let r = Rhomb::new(c(1.0, -0.3), c(1.0, 0.3), 1.0).unwrap();
        let contour = Contour::rhomb(&r).unwrap();
        let z = c(1.2999, 0.0);
        let f = |x: CPoint| x * x;
        let v = contour_integral(&contour, |x| f(x) / (x - z)).unwrap();
        let exact = f(z) * c(0.0, 2.0 * PI);
        assert!((v.value - exact).norm() < 1e-9, "{}", (v.value - exact).norm());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn polynomials_integrate_to_zero(
                coeffs in proptest::collection::vec(-2.0f64..2.0, 1..8),
                cx in -1.0f64..1.0, cy in -1.0f64..1.0, r in 0.1f64..2.0,
            ) {
                let contour = Contour::circle(c(cx, cy), r).unwrap();
                let poly = |z: CPoint| coeffs.iter().rev().fold(c(0.0, 0.0), |acc, &a| acc * z + a);
                let res = contour_integral(&contour, poly).unwrap();
                let scale = (cx.hypot(cy) + r).max(1.0).powi(coeffs.len() as i32) * r;
                prop_assert!(res.value.norm() <= res.error + 1e-12 * scale);
            }
        }
    }
}
