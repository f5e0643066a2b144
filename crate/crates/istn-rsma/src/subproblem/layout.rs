use std::ops::Range;

use crate::numeric::C64;
use crate::signal::{Column, LayerKind, LayerPlan, PrecoderSolution, Tx};

use super::Budgets;

/// Real variables of one precoder column: the real parts of its supported
/// coordinates followed by their imaginary parts.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnBlock {
    pub column: Column,
    /// Antenna-port indices carrying variables.
    pub support: Vec<usize>,
    pub offset: usize,
}

impl ColumnBlock {
    pub fn re(&self, k: usize) -> usize {
        self.offset + k
    }

    pub fn im(&self, k: usize) -> usize {
        self.offset + self.support.len() + k
    }

    pub fn variables(&self) -> Range<usize> {
        self.offset..self.offset + 2 * self.support.len()
    }
}

/// Position of every variable of the subproblem.
#[derive(Debug, Clone, PartialEq)]
pub struct VariableLayout {
    pub blocks: Vec<ColumnBlock>,
    pub c_spc: Vec<usize>,
    pub c_cpc: Vec<usize>,
    pub c_lpc: Vec<usize>,
    pub alpha_sat: Vec<usize>,
    pub alpha_cell: Vec<usize>,
    pub r_min: usize,
    /// One epigraph slack per decoding event, in plan order.
    pub slack: Vec<usize>,
    len: usize,
}

impl VariableLayout {
    /// A transmitter with a zero budget gets no precoder variables.
    pub fn new(plan: &LayerPlan, (sat_ports, bs_ports): (usize, usize), budgets: Budgets) -> Self {
        let mut next = 0;
        let mut take = |n: usize| {
            let r: Vec<usize> = (next..next + n).collect();
            next += n;
            r
        };
        let mut blocks = Vec::new();
        for col in plan.columns() {
            let (ports, budget) = match col.tx() {
                Tx::Sat => (sat_ports, budgets.sat),
                Tx::Bs => (bs_ports, budgets.bs),
            };
            let support = if budget > 0.0 { plan.support(col, ports) } else { Vec::new() };
            let offset = take(2 * support.len()).first().copied().unwrap_or(0);
            blocks.push(ColumnBlock { column: col, support, offset });
        }
        let layer_vars = |layer: LayerKind, n: usize, take: &mut dyn FnMut(usize) -> Vec<usize>| {
            if plan.has_layer(layer) {
                take(n)
            } else {
                Vec::new()
            }
        };
        let c_spc = layer_vars(LayerKind::Spc, plan.sat_users, &mut take);
        let c_cpc = layer_vars(LayerKind::Cpc, plan.sat_users, &mut take);
        let c_lpc = layer_vars(LayerKind::Lpc, plan.cell_users, &mut take);
        let alpha_sat = take(plan.sat_users);
        let alpha_cell = take(plan.cell_users);
        let r_min = take(1)[0];
        let slack = take(plan.events.len());
        Self {
            blocks,
            c_spc,
            c_cpc,
            c_lpc,
            alpha_sat,
            alpha_cell,
            r_min,
            slack,
            len: next,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn block(&self, col: Column) -> Option<&ColumnBlock> {
        self.blocks.iter().find(|b| b.column == col)
    }

    pub fn sat_blocks(&self) -> impl Iterator<Item = &ColumnBlock> {
        self.blocks.iter().filter(|b| b.column.tx() == Tx::Sat)
    }

    pub fn bs_blocks(&self) -> impl Iterator<Item = &ColumnBlock> {
        self.blocks.iter().filter(|b| b.column.tx() == Tx::Bs)
    }

    /// Writes the plan's variables from `x` into `sol`. Columns of the plan
    /// are overwritten (unsupported coordinates set to zero); everything the
    /// plan does not own is left untouched.
    pub fn write(&self, x: &[f64], sol: &mut PrecoderSolution) {
        for b in &self.blocks {
            let w = sol.column_mut(b.column);
            w.fill(C64::new(0.0, 0.0));
            for (k, &p) in b.support.iter().enumerate() {
                w[p] = C64::new(x[b.re(k)], x[b.im(k)]);
            }
        }
        let copy = |vars: &[usize], out: &mut Vec<f64>| {
            for (k, &v) in vars.iter().enumerate() {
                out[k] = x[v].max(0.0);
            }
        };
        copy(&self.c_spc, &mut sol.c_spc);
        copy(&self.c_cpc, &mut sol.c_cpc);
        copy(&self.c_lpc, &mut sol.c_lpc);
        copy(&self.alpha_sat, &mut sol.alpha_sat);
        copy(&self.alpha_cell, &mut sol.alpha_cell);
        sol.r_min = x[self.r_min];
    }

    /// Variable vector representing `sol` (slacks set to zero).
    pub fn read(&self, sol: &PrecoderSolution) -> Vec<f64> {
        let mut x = vec![0.0; self.len];
        for b in &self.blocks {
            let w = sol.column(b.column);
            for (k, &p) in b.support.iter().enumerate() {
                x[b.re(k)] = w[p].re;
                x[b.im(k)] = w[p].im;
            }
        }
        let copy = |vars: &[usize], vals: &[f64], x: &mut Vec<f64>| {
            for (&v, &val) in vars.iter().zip(vals) {
                x[v] = val;
            }
        };
        copy(&self.c_spc, &sol.c_spc, &mut x);
        copy(&self.c_cpc, &sol.c_cpc, &mut x);
        copy(&self.c_lpc, &sol.c_lpc, &mut x);
        copy(&self.alpha_sat, &sol.alpha_sat, &mut x);
        copy(&self.alpha_cell, &sol.alpha_cell, &mut x);
        x[self.r_min] = sol.r_min;
        x
    }
}
