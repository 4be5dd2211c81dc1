//! Flat torus (ℝ/2πrℤ)⁴ sampled on a uniform n⁴ grid with a full Fourier basis.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FourierMode {
    /// Integer wavevector, components in (−n/2, n/2].
    pub k: [i32; 4],
    pub sine: bool,
    /// Flat DFT index of the wavevector.
    pub(crate) idx: usize,
    /// Flat DFT index of −k.
    pub(crate) conj: usize,
}

impl FourierMode {
    pub fn norm_sq(&self) -> i64 {
        self.k.iter().map(|&c| (c as i64) * (c as i64)).sum()
    }

    pub fn self_conjugate(&self) -> bool {
        self.idx == self.conj
    }
}

pub struct TorusGrid {
    pub n: usize,
    pub radius: f64,
    pub modes: Vec<FourierMode>,
    /// position of the cosine mode for each flat DFT index of a canonical wavevector
    cos_pos: Vec<usize>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

fn signed(i: usize, n: usize) -> i32 {
    if i <= n / 2 {
        i as i32
    } else {
        i as i32 - n as i32
    }
}

impl TorusGrid {
    pub fn new(n: usize, radius: f64) -> Self {
        let total = n.pow(4);
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let mut modes = Vec::with_capacity(total);
        for idx in 0..total {
            let c = Self::unflatten(n, idx);
            let mc = [(n - c[0]) % n, (n - c[1]) % n, (n - c[2]) % n, (n - c[3]) % n];
            let conj = ((mc[0] * n + mc[1]) * n + mc[2]) * n + mc[3];
            if conj < idx {
                continue;
            }
            let k = [signed(c[0], n), signed(c[1], n), signed(c[2], n), signed(c[3], n)];
            modes.push(FourierMode { k, sine: false, idx, conj });
            if conj != idx {
                modes.push(FourierMode { k, sine: true, idx, conj });
            }
        }
        modes.sort_by_key(|m| (m.norm_sq(), m.idx, m.sine));
        let mut cos_pos = vec![usize::MAX; total];
        for (p, m) in modes.iter().enumerate() {
            if !m.sine {
                cos_pos[m.idx] = p;
            }
        }
        TorusGrid { n, radius, modes, cos_pos, fwd, inv }
    }

    pub fn node_count(&self) -> usize {
        self.n.pow(4)
    }

    pub fn unflatten(n: usize, idx: usize) -> [usize; 4] {
        [idx / (n * n * n), (idx / (n * n)) % n, (idx / n) % n, idx % n]
    }

    pub fn node(&self, idx: usize) -> [f64; 4] {
        let c = Self::unflatten(self.n, idx);
        let h = 2.0 * PI * self.radius / self.n as f64;
        [c[0] as f64 * h, c[1] as f64 * h, c[2] as f64 * h, c[3] as f64 * h]
    }

    pub fn volume(&self) -> f64 {
        (2.0 * PI * self.radius).powi(4)
    }

    pub fn cell_weight(&self) -> f64 {
        self.volume() / self.node_count() as f64
    }

    fn fft4(&self, data: &mut [Complex64], inverse: bool) {
        let n = self.n;
        let plan = if inverse { &self.inv } else { &self.fwd };
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        for axis in 0..4 {
            let stride = n.pow(3 - axis as u32);
            for base in 0..data.len() {
                // visit each line once: its first element has a zero coordinate on this axis
                if (base / stride) % n != 0 {
                    continue;
                }
                for j in 0..n {
                    line[j] = data[base + j * stride];
                }
                plan.process(&mut line);
                for j in 0..n {
                    data[base + j * stride] = line[j];
                }
            }
        }
    }

    /// Unnormalized forward DFT of real node values.
    pub fn dft(&self, values: &[f64]) -> Vec<Complex64> {
        let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fft4(&mut data, false);
        data
    }

    /// Node values from DFT coefficients (normalized inverse), real part.
    pub fn idft(&self, mut data: Vec<Complex64>) -> Vec<f64> {
        self.fft4(&mut data, true);
        let s = 1.0 / self.node_count() as f64;
        data.iter().map(|c| c.re * s).collect()
    }

    fn mode_norm(&self, m: &FourierMode) -> f64 {
        if m.self_conjugate() {
            1.0 / self.volume().sqrt()
        } else {
            (2.0 / self.volume()).sqrt()
        }
    }

    pub fn analyze(&self, values: &[f64]) -> Vec<f64> {
        let c = self.dft(values);
        let w = self.cell_weight();
        self.modes
            .iter()
            .map(|m| {
                let z = c[m.idx];
                let nm = self.mode_norm(m) * w;
                if m.sine {
                    -z.im * nm
                } else {
                    z.re * nm
                }
            })
            .collect()
    }

    pub fn synthesize(&self, coeffs: &[f64]) -> Vec<f64> {
        let total = self.node_count();
        let mut a = vec![Complex64::new(0.0, 0.0); total];
        for (m, &c) in self.modes.iter().zip(coeffs) {
            let nm = self.mode_norm(m);
            if m.self_conjugate() {
                a[m.idx] += Complex64::new(nm * c, 0.0);
            } else if m.sine {
                a[m.idx] += Complex64::new(0.0, -0.5 * nm * c);
                a[m.conj] += Complex64::new(0.0, 0.5 * nm * c);
            } else {
                a[m.idx] += Complex64::new(0.5 * nm * c, 0.0);
                a[m.conj] += Complex64::new(0.5 * nm * c, 0.0);
            }
        }
        // idft divides by N; the basis synthesis is an unnormalized sum
        let n = total as f64;
        self.idft(a).into_iter().map(|v| v * n).collect()
    }

    pub fn eval_mode(&self, m: &FourierMode, x: &[f64; 4]) -> f64 {
        let phase: f64 = (0..4).map(|a| m.k[a] as f64 * x[a] / self.radius).sum();
        let nm = self.mode_norm(m);
        if m.sine {
            nm * phase.sin()
        } else {
            nm * phase.cos()
        }
    }

    /// Index in the mode list of the cosine mode carrying wavevector k (or −k).
    pub fn find_mode(&self, k: [i32; 4], sine: bool) -> Option<usize> {
        let n = self.n as i32;
        let flat = |k: [i32; 4]| -> usize {
            let c: Vec<usize> = k.iter().map(|&v| (((v % n) + n) % n) as usize).collect();
            ((c[0] * self.n + c[1]) * self.n + c[2]) * self.n + c[3]
        };
        let a = flat(k);
        let b = flat([-k[0], -k[1], -k[2], -k[3]]);
        let canonical = a.min(b);
        let p = self.cos_pos[canonical];
        if p == usize::MAX {
            return None;
        }
        if sine {
            if self.modes[p].self_conjugate() {
                None
            } else {
                Some(p + 1)
            }
        } else {
            Some(p)
        }
    }

    /// Spectral partial derivative ∂^{orders} of node values; odd orders drop the Nyquist plane.
    pub fn derivative(&self, values: &[f64], orders: [u32; 4]) -> Vec<f64> {
        let mut c = self.dft(values);
        let n = self.n;
        for (idx, z) in c.iter_mut().enumerate() {
            let ci = Self::unflatten(n, idx);
            let mut f = Complex64::new(1.0, 0.0);
            for a in 0..4 {
                if orders[a] == 0 {
                    continue;
                }
                let k = signed(ci[a], n);
                if orders[a] % 2 == 1 && n % 2 == 0 && ci[a] == n / 2 {
                    f = Complex64::new(0.0, 0.0);
                    break;
                }
                let ik = Complex64::new(0.0, k as f64 / self.radius);
                f *= ik.powu(orders[a]);
            }
            *z *= f;
        }
        self.idft(c)
    }

    /// Multiply every DFT coefficient by symbol(|k|²/r²).
    pub fn radial_multiplier(&self, values: &[f64], symbol: impl Fn(f64) -> f64) -> Vec<f64> {
        let mut c = self.dft(values);
        let n = self.n;
        let r2 = self.radius * self.radius;
        for (idx, z) in c.iter_mut().enumerate() {
            let ci = Self::unflatten(n, idx);
            let k2: f64 = ci.iter().map(|&v| (signed(v, n) as f64).powi(2)).sum();
            *z *= symbol(k2 / r2);
        }
        self.idft(c)
    }
}
