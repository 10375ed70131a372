use crate::error::{Error, Result};

/// Signed comb mode label, `k = 0` being the pumped resonance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeIndex(i32);

impl ModeIndex {
    pub fn new(k: i32, m: usize) -> Result<Self> {
        if k.unsigned_abs() as usize > m {
            return Err(Error::param(
                "k",
                format!("|{k}| exceeds mode half-width {m}"),
            ));
        }
        Ok(Self(k))
    }

    pub fn get(self) -> i32 {
        self.0
    }

    /// Storage slot in a `2M+1` array ordered `-M..=M`.
    pub fn slot(self, m: usize) -> usize {
        (self.0 + m as i32) as usize
    }

    pub fn from_slot(slot: usize, m: usize) -> Self {
        Self(slot as i32 - m as i32)
    }
}

/// One term `a_r^+ a_s^+ a_p a_q` of the four-wave-mixing Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CouplingQuadruple {
    pub r: i32,
    pub s: i32,
    pub p: i32,
    pub q: i32,
}

impl CouplingQuadruple {
    pub fn new(r: i32, s: i32, p: i32, q: i32) -> Option<Self> {
        (r + s == p + q).then_some(Self { r, s, p, q })
    }

    /// Quadruple of the Hermitian-conjugate term.
    pub fn adjoint(self) -> Self {
        Self {
            r: self.q,
            s: self.p,
            p: self.s,
            q: self.r,
        }
    }
}

/// Every ordered `(r, s, p, q)` in `[-M, M]^4` with `r + s = p + q`.
///
/// Self- and cross-phase terms are included. Output is sorted
/// lexicographically by `(r, s, p, q)`.
pub fn energy_conserving_quadruples(m: usize) -> Vec<CouplingQuadruple> {
    let m = m as i32;
    let mut out = Vec::new();
    for r in -m..=m {
        for s in -m..=m {
            let total = r + s;
            // p ranges so that q = total - p stays inside the window
            let lo = (total - m).max(-m);
            let hi = (total + m).min(m);
            for p in lo..=hi {
                out.push(CouplingQuadruple {
                    r,
                    s,
                    p,
                    q: total - p,
                });
            }
        }
    }
    out
}
