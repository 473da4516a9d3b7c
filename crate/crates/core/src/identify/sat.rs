use std::time::{Duration, Instant};

use varisat::{ExtendFormula, Lit, Solver};

use super::encode::Cnf;

/// Incremental CDCL session over a growing [`Cnf`]: each call feeds only the
/// clauses added since the previous call.
pub struct SatSession {
    solver: Solver<'static>,
    fed: usize,
    calls: usize,
    elapsed: Duration,
}

impl Default for SatSession {
    fn default() -> Self {
        Self::new()
    }
}

impl SatSession {
    pub fn new() -> Self {
        Self {
            solver: Solver::new(),
            fed: 0,
            calls: 0,
            elapsed: Duration::ZERO,
        }
    }

    /// Returns the model (indexed by variable, slot 0 unused) or `None` when
    /// unsatisfiable.
    pub fn solve(&mut self, cnf: &Cnf) -> Option<Vec<bool>> {
        for clause in &cnf.clauses()[self.fed..] {
            let lits: Vec<Lit> = clause.iter().map(|&l| Lit::from_dimacs(l as isize)).collect();
            self.solver.add_clause(&lits);
        }
        self.fed = cnf.clauses().len();
        let start = Instant::now();
        let sat = self.solver.solve().expect("solver does not use proof output");
        self.elapsed += start.elapsed();
        self.calls += 1;
        if !sat {
            return None;
        }
        let mut model = vec![false; cnf.num_vars() as usize + 1];
        for lit in self.solver.model().expect("model after SAT") {
            let v = lit.var().to_dimacs() as usize;
            if v < model.len() {
                model[v] = lit.is_positive();
            }
        }
        Some(model)
    }

    pub fn calls(&self) -> usize {
        self.calls
    }

    pub fn elapsed(&self) -> Duration {
        self.elapsed
    }
}
