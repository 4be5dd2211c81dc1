//! Round S⁴ of radius a: hyperspherical product grid and real harmonic basis.
//!
//! Coordinates: x₅ = cos θ₁, x₄ = sin θ₁ cos θ₂, x₃ = sin θ₁ sin θ₂ cos θ₃,
//! x₁ + i x₂ = sin θ₁ sin θ₂ sin θ₃ e^{iφ}. Points are stored as unit vectors of ℝ⁵.

use std::f64::consts::PI;

use crate::quadrature::{gauss_gegenbauer, gegenbauer_all};

/// Real harmonic Y_{l₁ l₂ l₃ m}; m > 0 is a cosine in φ, m < 0 a sine.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HarmonicMode {
    pub l1: u32,
    pub l2: u32,
    pub l3: u32,
    pub m: i32,
}

pub struct SphereGrid {
    pub degree: usize,
    pub radius: f64,
    pub t1: Vec<f64>,
    pub w1: Vec<f64>,
    pub t2: Vec<f64>,
    pub w2: Vec<f64>,
    pub t3: Vec<f64>,
    pub w3: Vec<f64>,
    pub nphi: usize,
    pub modes: Vec<HarmonicMode>,
    // normalized factor tables, indexed [key * n + i]
    f1: Vec<f64>,
    f2: Vec<f64>,
    f3: Vec<f64>,
    // normalization constants per key, for point evaluation
    c1: Vec<f64>,
    c2: Vec<f64>,
    c3: Vec<f64>,
    // trig table [τ * nphi + ip] with weight folded in for analysis
    trig: Vec<f64>,
    a_list: Vec<(usize, usize)>,
    b_list: Vec<(usize, usize)>,
    c_list: Vec<(usize, usize)>,
}

fn m_of(tau: usize) -> usize {
    (tau + 1) / 2
}

impl SphereGrid {
    pub fn new(degree: usize, radius: f64) -> Self {
        let l = degree;
        let n = l + 1;
        let (t1, w1) = gauss_gegenbauer(n, 1.5);
        let (t2, w2) = gauss_gegenbauer(n, 1.0);
        let (t3, w3) = gauss_gegenbauer(n, 0.5);
        let nphi = 2 * l + 2;
        let key = |a: usize, b: usize| a * n + b;

        let raw_table = |nodes: &[f64], shift: f64| -> Vec<f64> {
            // raw[key(hi, lo) * n + i] = C^{lo + shift}_{hi − lo}(t_i) (1 − t_i²)^{lo/2}
            let mut out = vec![0.0; n * n * n];
            let mut g = Vec::new();
            for lo in 0..=l {
                for (i, &t) in nodes.iter().enumerate() {
                    gegenbauer_all(l - lo, lo as f64 + shift, t, &mut g);
                    let s = (1.0 - t * t).max(0.0).powf(lo as f64 / 2.0);
                    for hi in lo..=l {
                        out[key(hi, lo) * n + i] = g[hi - lo] * s;
                    }
                }
            }
            out
        };
        let normalize = |raw: &mut Vec<f64>, w: &[f64]| -> Vec<f64> {
            let mut c = vec![0.0; n * n];
            for hi in 0..=l {
                for lo in 0..=hi {
                    let k = key(hi, lo);
                    let s: f64 = (0..n).map(|i| w[i] * raw[k * n + i].powi(2)).sum();
                    let nc = 1.0 / s.sqrt();
                    c[k] = nc;
                    for i in 0..n {
                        raw[k * n + i] *= nc;
                    }
                }
            }
            c
        };
        let mut f1 = raw_table(&t1, 1.5);
        let c1 = normalize(&mut f1, &w1);
        let mut f2 = raw_table(&t2, 1.0);
        let c2 = normalize(&mut f2, &w2);
        let mut f3 = raw_table(&t3, 0.5);
        let c3 = normalize(&mut f3, &w3);

        let ntau = 2 * l + 1;
        let mut trig = vec![0.0; ntau * nphi];
        for ip in 0..nphi {
            let phi = 2.0 * PI * ip as f64 / nphi as f64;
            for tau in 0..ntau {
                let m = m_of(tau) as f64;
                trig[tau * nphi + ip] = if tau == 0 {
                    1.0 / (2.0 * PI).sqrt()
                } else if tau % 2 == 1 {
                    (m * phi).cos() / PI.sqrt()
                } else {
                    (m * phi).sin() / PI.sqrt()
                };
            }
        }

        let mut a_list = Vec::new();
        for tau in 0..ntau {
            for l3 in m_of(tau)..=l {
                a_list.push((tau, l3));
            }
        }
        let mut b_list = Vec::new();
        for (a, &(_, l3)) in a_list.iter().enumerate() {
            for l2 in l3..=l {
                b_list.push((a, l2));
            }
        }
        let mut c_list = Vec::new();
        let mut modes = Vec::new();
        for (b, &(a, l2)) in b_list.iter().enumerate() {
            let (tau, l3) = a_list[a];
            for l1 in l2..=l {
                c_list.push((b, l1));
                let m = m_of(tau) as i32;
                let m = if tau % 2 == 0 { -m } else { m };
                modes.push(HarmonicMode { l1: l1 as u32, l2: l2 as u32, l3: l3 as u32, m });
            }
        }
        SphereGrid {
            degree,
            radius,
            t1,
            w1,
            t2,
            w2,
            t3,
            w3,
            nphi,
            modes,
            f1,
            f2,
            f3,
            c1,
            c2,
            c3,
            trig,
            a_list,
            b_list,
            c_list,
        }
    }

    fn n(&self) -> usize {
        self.degree + 1
    }

    pub fn node_count(&self) -> usize {
        let n = self.n();
        n * n * n * self.nphi
    }

    pub fn node(&self, idx: usize) -> [f64; 5] {
        let n = self.n();
        let ip = idx % self.nphi;
        let i3 = (idx / self.nphi) % n;
        let i2 = (idx / (self.nphi * n)) % n;
        let i1 = idx / (self.nphi * n * n);
        let (c1, c2, c3) = (self.t1[i1], self.t2[i2], self.t3[i3]);
        let s1 = (1.0 - c1 * c1).max(0.0).sqrt();
        let s2 = (1.0 - c2 * c2).max(0.0).sqrt();
        let s3 = (1.0 - c3 * c3).max(0.0).sqrt();
        let phi = 2.0 * PI * ip as f64 / self.nphi as f64;
        let r = s1 * s2 * s3;
        [r * phi.cos(), r * phi.sin(), s1 * s2 * c3, s1 * c2, c1]
    }

    pub fn node_weight(&self, idx: usize) -> f64 {
        let n = self.n();
        let i3 = (idx / self.nphi) % n;
        let i2 = (idx / (self.nphi * n)) % n;
        let i1 = idx / (self.nphi * n * n);
        self.radius.powi(4) * self.w1[i1] * self.w2[i2] * self.w3[i3] * 2.0 * PI / self.nphi as f64
    }

    pub fn volume(&self) -> f64 {
        8.0 * PI * PI / 3.0 * self.radius.powi(4)
    }

    pub fn analyze(&self, values: &[f64]) -> Vec<f64> {
        let n = self.n();
        let np = self.nphi;
        let ntau = 2 * self.degree + 1;
        let wphi = 2.0 * PI / np as f64;
        let mut u1 = vec![0.0; n * n * n * ntau];
        for line in 0..n * n * n {
            let src = &values[line * np..(line + 1) * np];
            for tau in 0..ntau {
                let tr = &self.trig[tau * np..(tau + 1) * np];
                let s: f64 = src.iter().zip(tr).map(|(a, b)| a * b).sum();
                u1[line * ntau + tau] = s * wphi;
            }
        }
        let na = self.a_list.len();
        let mut u2 = vec![0.0; n * n * na];
        for i12 in 0..n * n {
            for (a, &(tau, l3)) in self.a_list.iter().enumerate() {
                let k = (l3 * n + m_of(tau)) * n;
                let mut s = 0.0;
                for i3 in 0..n {
                    s += self.w3[i3] * self.f3[k + i3] * u1[(i12 * n + i3) * ntau + tau];
                }
                u2[i12 * na + a] = s;
            }
        }
        let nb = self.b_list.len();
        let mut u3 = vec![0.0; n * nb];
        for i1 in 0..n {
            for (b, &(a, l2)) in self.b_list.iter().enumerate() {
                let l3 = self.a_list[a].1;
                let k = (l2 * n + l3) * n;
                let mut s = 0.0;
                for i2 in 0..n {
                    s += self.w2[i2] * self.f2[k + i2] * u2[(i1 * n + i2) * na + a];
                }
                u3[i1 * nb + b] = s;
            }
        }
        let scale = self.radius * self.radius;
        self.c_list
            .iter()
            .map(|&(b, l1)| {
                let l2 = self.b_list[b].1;
                let k = (l1 * n + l2) * n;
                let s: f64 = (0..n).map(|i1| self.w1[i1] * self.f1[k + i1] * u3[i1 * nb + b]).sum();
                s * scale
            })
            .collect()
    }

    pub fn synthesize(&self, coeffs: &[f64]) -> Vec<f64> {
        let n = self.n();
        let np = self.nphi;
        let ntau = 2 * self.degree + 1;
        let nb = self.b_list.len();
        let na = self.a_list.len();
        let scale = 1.0 / (self.radius * self.radius);
        let mut u3 = vec![0.0; n * nb];
        for (c, &(b, l1)) in self.c_list.iter().enumerate() {
            let coef = coeffs[c] * scale;
            if coef == 0.0 {
                continue;
            }
            let l2 = self.b_list[b].1;
            let k = (l1 * n + l2) * n;
            for i1 in 0..n {
                u3[i1 * nb + b] += coef * self.f1[k + i1];
            }
        }
        let mut u2 = vec![0.0; n * n * na];
        for i1 in 0..n {
            for (b, &(a, l2)) in self.b_list.iter().enumerate() {
                let v = u3[i1 * nb + b];
                if v == 0.0 {
                    continue;
                }
                let l3 = self.a_list[a].1;
                let k = (l2 * n + l3) * n;
                for i2 in 0..n {
                    u2[(i1 * n + i2) * na + a] += v * self.f2[k + i2];
                }
            }
        }
        let mut u1 = vec![0.0; n * n * n * ntau];
        for i12 in 0..n * n {
            for (a, &(tau, l3)) in self.a_list.iter().enumerate() {
                let v = u2[i12 * na + a];
                if v == 0.0 {
                    continue;
                }
                let k = (l3 * n + m_of(tau)) * n;
                for i3 in 0..n {
                    u1[(i12 * n + i3) * ntau + tau] += v * self.f3[k + i3];
                }
            }
        }
        let mut out = vec![0.0; n * n * n * np];
        for line in 0..n * n * n {
            let src = &u1[line * ntau..(line + 1) * ntau];
            let dst = &mut out[line * np..(line + 1) * np];
            for (tau, &v) in src.iter().enumerate() {
                if v == 0.0 {
                    continue;
                }
                let tr = &self.trig[tau * np..(tau + 1) * np];
                for (d, t) in dst.iter_mut().zip(tr) {
                    *d += v * t;
                }
            }
        }
        out
    }

    /// Value of a basis harmonic at a unit vector x ∈ S⁴ ⊂ ℝ⁵.
    pub fn eval_mode(&self, md: &HarmonicMode, x: &[f64; 5]) -> f64 {
        let n = self.n();
        let (l1, l2, l3) = (md.l1 as usize, md.l2 as usize, md.l3 as usize);
        let am = md.m.unsigned_abs() as usize;
        let r1 = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3]).sqrt();
        let r2 = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        let r3 = (x[0] * x[0] + x[1] * x[1]).sqrt();
        let ct1 = x[4].clamp(-1.0, 1.0);
        let (ct2, st2) = if r1 > 0.0 { (x[3] / r1, r2 / r1) } else { (1.0, 0.0) };
        let (ct3, st3) = if r2 > 0.0 { (x[2] / r2, r3 / r2) } else { (1.0, 0.0) };
        let phi = x[1].atan2(x[0]);
        let mut g = Vec::new();
        gegenbauer_all(l1 - l2, l2 as f64 + 1.5, ct1, &mut g);
        let a1 = g[l1 - l2] * r1.powi(l2 as i32) * self.c1[l1 * n + l2];
        gegenbauer_all(l2 - l3, l3 as f64 + 1.0, ct2, &mut g);
        let a2 = g[l2 - l3] * st2.powi(l3 as i32) * self.c2[l2 * n + l3];
        gegenbauer_all(l3 - am, am as f64 + 0.5, ct3, &mut g);
        let a3 = g[l3 - am] * st3.powi(am as i32) * self.c3[l3 * n + am];
        let t = if md.m == 0 {
            1.0 / (2.0 * PI).sqrt()
        } else if md.m > 0 {
            (am as f64 * phi).cos() / PI.sqrt()
        } else {
            (am as f64 * phi).sin() / PI.sqrt()
        };
        a1 * a2 * a3 * t / (self.radius * self.radius)
    }

    pub fn find_mode(&self, md: HarmonicMode) -> Option<usize> {
        self.modes.iter().position(|m| *m == md)
    }
}
