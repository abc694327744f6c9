#![allow(dead_code)]
//! Independent reference implementations shared by the integration tests.

/// Dense triple-loop contextual reconstruction. `feature` is `h×w×c`
/// row-major, `mask[y*w + x]` is `true` on missing pixels. Returns `None`
/// when there is no complete patch or no incomplete one.
pub fn cr_oracle(
    feature: &[f64],
    h: usize,
    w: usize,
    c: usize,
    mask: &[bool],
    p: usize,
    s: usize,
    alpha: f64,
) -> Option<Vec<f64>> {
    let origins = |len: usize| {
        let mut v = Vec::new();
        let mut o = 0;
        while o + p <= len {
            v.push(o);
            o += s;
        }
        if *v.last().unwrap() != len - p {
            v.push(len - p);
        }
        v
    };
    let mut all = Vec::new();
    for y in origins(h) {
        for x in origins(w) {
            all.push((y, x));
        }
    }
    let complete = |&(y, x): &(usize, usize)| {
        (0..p).all(|dy| (0..p).all(|dx| !mask[(y + dy) * w + x + dx]))
    };
    let known: Vec<(usize, usize)> = all.iter().copied().filter(|o| complete(o)).collect();
    let missing: Vec<(usize, usize)> = all.iter().copied().filter(|o| !complete(o)).collect();
    if known.is_empty() || missing.is_empty() {
        return None;
    }
    let at = |y: usize, x: usize, ch: usize| feature[(y * w + x) * c + ch];

    let mut sum = vec![0.0; feature.len()];
    let mut cnt = vec![0usize; h * w];
    for &(iy, ix) in &missing {
        let shown = (0..p * p)
            .filter(|k| !mask[(iy + k / p) * w + ix + k % p])
            .count();
        let scale = if shown == 0 { 0.0 } else { ((p * p) as f64 / shown as f64).sqrt() };
        let mut sims = Vec::new();
        for &(jy, jx) in &known {
            let (mut dot, mut ni, mut nj) = (0.0, 0.0, 0.0);
            for dy in 0..p {
                for dx in 0..p {
                    if mask[(iy + dy) * w + ix + dx] {
                        continue;
                    }
                    for ch in 0..c {
                        let a = at(iy + dy, ix + dx, ch) * scale;
                        let b = at(jy + dy, jx + dx, ch) * scale;
                        dot += a * b;
                        ni += a * a;
                        nj += b * b;
                    }
                }
            }
            sims.push(dot / ((ni.sqrt() + 1e-8) * (nj.sqrt() + 1e-8)));
        }
        let m = sims.iter().map(|v| alpha * v).fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = sims.iter().map(|v| (alpha * v - m).exp()).collect();
        let z: f64 = e.iter().sum();
        for dy in 0..p {
            for dx in 0..p {
                let (y, x) = (iy + dy, ix + dx);
                for ch in 0..c {
                    let mut v = 0.0;
                    for (k, &(jy, jx)) in known.iter().enumerate() {
                        v += e[k] / z * at(jy + dy, jx + dx, ch);
                    }
                    sum[(y * w + x) * c + ch] += v;
                }
                cnt[y * w + x] += 1;
            }
        }
    }
    let mut out = feature.to_vec();
    for pix in 0..h * w {
        if cnt[pix] > 0 {
            for ch in 0..c {
                out[pix * c + ch] = sum[pix * c + ch] / cnt[pix] as f64;
            }
        }
    }
    Some(out)
}

/// MIoU by counting, one class at a time.
pub fn miou_oracle(pred: &[bool], gt: &[bool]) -> f64 {
    let mut total = 0.0;
    for class in [true, false] {
        let inter = pred
            .iter()
            .zip(gt)
            .filter(|(p, g)| **p == class && **g == class)
            .count();
        let union = pred
            .iter()
            .zip(gt)
            .filter(|(p, g)| **p == class || **g == class)
            .count();
        total += if union == 0 { 1.0 } else { inter as f64 / union as f64 };
    }
    total / 2.0
}

/// Small deterministic generator so oracles do not share the library's RNG
/// plumbing.
pub struct Lcg(pub u64);

impl Lcg {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        self.0 >> 11
    }

    pub fn unit(&mut self) -> f64 {
        self.next_u64() as f64 / (1u64 << 53) as f64
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }

    pub fn coin(&mut self) -> bool {
        self.next_u64() & 1 == 1
    }
}
