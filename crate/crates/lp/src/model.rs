use crate::LpError;

/// Optimization direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

/// Relation between a row's activity and its right-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

/// One sparse constraint row.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

/// Sparse linear program with per-variable bounds.
///
/// Bounds are `lower[j] <= x[j] <= upper[j]` where `lower` may be `-inf`
/// and `upper` may be `+inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundedLP {
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub rows: Vec<Row>,
    pub var_labels: Vec<String>,
    pub row_labels: Vec<String>,
}

impl BoundedLP {
    pub fn new(sense: Sense) -> Self {
        BoundedLP {
            sense,
            objective: Vec::new(),
            lower: Vec::new(),
            upper: Vec::new(),
            rows: Vec::new(),
            var_labels: Vec::new(),
            row_labels: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Appends a variable and returns its index.
    pub fn add_var(&mut self, objective: f64, lower: f64, upper: f64) -> usize {
        self.objective.push(objective);
        self.lower.push(lower);
        self.upper.push(upper);
        self.objective.len() - 1
    }

    /// Appends a row and returns its index. Zero coefficients are dropped.
    pub fn add_row(&mut self, coeffs: Vec<(usize, f64)>, relation: Relation, rhs: f64) -> usize {
        let coeffs = coeffs.into_iter().filter(|&(_, a)| a != 0.0).collect();
        self.rows.push(Row { coeffs, relation, rhs });
        self.rows.len() - 1
    }

    /// Sum of `coeffs · x` for row `i`.
    pub fn row_activity(&self, i: usize, x: &[f64]) -> f64 {
        self.rows[i].coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(LpError::Invalid("bound vectors differ in length from objective".into()));
        }
        if !self.var_labels.is_empty() && self.var_labels.len() != n {
            return Err(LpError::Invalid("variable label count mismatch".into()));
        }
        if !self.row_labels.is_empty() && self.row_labels.len() != self.rows.len() {
            return Err(LpError::Invalid("row label count mismatch".into()));
        }
        for j in 0..n {
            if !self.objective[j].is_finite() {
                return Err(LpError::Invalid(format!("objective coefficient {j} is not finite")));
            }
            let (lo, hi) = (self.lower[j], self.upper[j]);
            if lo.is_nan() || hi.is_nan() || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return Err(LpError::Invalid(format!("variable {j} has invalid bounds [{lo}, {hi}]")));
            }
            if lo > hi {
                return Err(LpError::Invalid(format!("variable {j} has lower bound {lo} above upper bound {hi}")));
            }
        }
        for (i, row) in self.rows.iter().enumerate() {
            if !row.rhs.is_finite() {
                return Err(LpError::Invalid(format!("row {i} has non-finite right-hand side")));
            }
            for &(j, a) in &row.coeffs {
                if j >= n {
                    return Err(LpError::Invalid(format!("row {i} references variable {j} of {n}")));
                }
                if !a.is_finite() {
                    return Err(LpError::Invalid(format!("row {i} has non-finite coefficient")));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_row_drops_zero_coefficients() {
        let mut lp = BoundedLP::new(Sense::Maximize);
        let x = lp.add_var(1.0, 0.0, 1.0);
        let y = lp.add_var(1.0, 0.0, 1.0);
        lp.add_row(vec![(x, 1.0), (y, 0.0)], Relation::Le, 1.0);
        assert_eq!(lp.rows[0].coeffs, vec![(x, 1.0)]);
    }

    #[test]
    fn validate_rejects_inverted_bounds_and_bad_indices() {
        let mut lp = BoundedLP::new(Sense::Minimize);
        lp.add_var(1.0, 2.0, 1.0);
        assert!(lp.validate().is_err());

        let mut lp = BoundedLP::new(Sense::Minimize);
        lp.add_var(1.0, 0.0, 1.0);
        lp.add_row(vec![(3, 1.0)], Relation::Le, 1.0);
        assert!(lp.validate().is_err());

        let mut lp = BoundedLP::new(Sense::Minimize);
        lp.add_var(f64::NAN, 0.0, 1.0);
        assert!(lp.validate().is_err());
    }
}
