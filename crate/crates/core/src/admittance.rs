//! Bus admittance matrix with off-nominal tap stamping.

use num_complex::Complex64;

use crate::network::{apply_shunts, Branch, Network};

/// Dense, row-major complex Y-bus in per-unit.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmittanceMatrix {
    n: usize,
    entries: Vec<Complex64>,
}

impl AdmittanceMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, entries: vec![Complex64::new(0.0, 0.0); n * n] }
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "admittance rows must be square");
            m.entries[i * n..(i + 1) * n].copy_from_slice(row);
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.n + j]
    }

    #[inline]
    fn add(&mut self, i: usize, j: usize, value: Complex64) {
        self.entries[i * self.n + j] += value;
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    /// Nonzero entries as `(i, j, y)` in row-major order.
    pub fn nonzeros(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        self.entries.iter().enumerate().filter_map(move |(k, y)| {
            (y.re != 0.0 || y.im != 0.0).then_some((k / self.n, k % self.n, *y))
        })
    }
}

/// Series admittance and half the charging admittance of a branch.
pub fn branch_admittance(branch: &Branch) -> (Complex64, Complex64) {
    assert!(
        branch.r != 0.0 || branch.x != 0.0,
        "branch {}-{} has zero impedance",
        branch.from_bus,
        branch.to_bus
    );
    let y_series = Complex64::new(branch.r, branch.x).inv();
    let y_shunt_half = Complex64::new(0.0, branch.b_charging / 2.0);
    (y_series, y_shunt_half)
}

/// The four Y-bus contributions of one branch:
/// `[(from, from), (to, to), (from, to) = (to, from)]`.
pub(crate) fn branch_stamp(branch: &Branch) -> [Complex64; 3] {
    let (y, half) = branch_admittance(branch);
    let a = branch.tap;
    let a2 = a * a;
    [(y + half) / a2, y + half, -y / a]
}

pub fn build_ybus(network: &Network) -> AdmittanceMatrix {
    let mut ybus = AdmittanceMatrix::zeros(network.bus_count());
    for (branch, (f, t)) in network.branches.iter().zip(network.branch_endpoints()) {
        let [yff, ytt, yft] = branch_stamp(branch);
        ybus.add(f, f, yff);
        ybus.add(t, t, ytt);
        ybus.add(f, t, yft);
        ybus.add(t, f, yft);
    }
    for (i, y) in apply_shunts(network).into_iter().enumerate() {
        ybus.add(i, i, y);
    }
    ybus
}
