/// A quadrature rule on the reference triangle in barycentric coordinates.
/// Weights sum to one, so element integrals are `area * sum(w_q g(x_q))`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    /// Polynomial degree integrated exactly.
    pub degree: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Symmetric six-point rule, exact to degree 4.
    pub fn degree4() -> Self {
        let (a1, w1) = (0.445948490915964886318329253883, 0.223381589678011465944640749185);
        let (a2, w2) = (0.091576213509770743459571463402, 0.109951743655321867388692584148);
        let mut points = Vec::with_capacity(6);
        let mut weights = Vec::with_capacity(6);
        for (a, w) in [(a1, w1), (a2, w2)] {
            let b = 1.0 - 2.0 * a;
            points.extend([[b, a, a], [a, b, a], [a, a, b]]);
            weights.extend([w; 3]);
        }
        QuadratureRule {
            points,
            weights,
            degree: 4,
        }
    }

    /// Seven-point rule, exact to degree 5. Used for the transport forms,
    /// whose integrands are quintic for quadratic elements.
    pub fn degree5() -> Self {
        let s15 = 15f64.sqrt();
        let a = (6.0 - s15) / 21.0;
        let b = (6.0 + s15) / 21.0;
        let wa = (155.0 - s15) / 1200.0;
        let wb = (155.0 + s15) / 1200.0;
        let third = 1.0 / 3.0;
        let mut points = vec![[third, third, third]];
        let mut weights = vec![9.0 / 40.0];
        for (p, w) in [(a, wa), (b, wb)] {
            let q = 1.0 - 2.0 * p;
            points.extend([[q, p, p], [p, q, p], [p, p, q]]);
            weights.extend([w; 3]);
        }
        QuadratureRule {
            points,
            weights,
            degree: 5,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    // Integral of l1^a l2^b over the unit reference triangle divided by its
    // area: 2 a! b! / (a + b + 2)!.
    fn exact(a: u32, b: u32) -> f64 {
        2.0 * factorial(a) * factorial(b) / factorial(a + b + 2)
    }

    fn check(rule: &QuadratureRule) {
        assert!((rule.weights.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        for p in &rule.points {
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        }
        for a in 0..=rule.degree as u32 {
            for b in 0..=(rule.degree as u32 - a) {
                let q: f64 = rule
                    .points
                    .iter()
                    .zip(&rule.weights)
                    .map(|(p, w)| w * p[1].powi(a as i32) * p[2].powi(b as i32))
                    .sum();
                assert!((q - exact(a, b)).abs() < 1e-14, "monomial ({a},{b})");
            }
        }
    }

    #[test]
    fn degree4_exact_on_monomials() {
        check(&QuadratureRule::degree4());
    }

    #[test]
    fn degree5_exact_on_monomials() {
        check(&QuadratureRule::degree5());
    }

    #[test]
    fn degree4_not_exact_for_degree6() {
        let r = QuadratureRule::degree4();
        let q: f64 = r.points.iter().zip(&r.weights).map(|(p, w)| w * p[1].powi(6)).sum();
        assert!((q - exact(6, 0)).abs() > 1e-8);
    }
}
