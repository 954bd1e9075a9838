//! Direct-formula reference implementations used as test oracles. They
//! favour transparency over speed: counts are recomputed by linear scans
//! over the padded sequences on every call.

#![allow(dead_code)]

/// Padded trigram events `(u, v, w)` of every sequence, with `eos = n` and
/// `bos = n + 1` for a space of `n` symbols.
pub fn events(seqs: &[Vec<u32>], n: usize) -> Vec<(u32, u32, u32)> {
    let (eos, bos) = (n as u32, n as u32 + 1);
    let mut out = Vec::new();
    for s in seqs {
        let mut padded = vec![bos, bos];
        padded.extend(s);
        padded.push(eos);
        for win in padded.windows(3) {
            out.push((win[0], win[1], win[2]));
        }
    }
    out
}

fn distinct<T: PartialEq + Clone>(items: impl Iterator<Item = T>) -> Vec<T> {
    let mut out: Vec<T> = Vec::new();
    for x in items {
        if !out.contains(&x) {
            out.push(x);
        }
    }
    out
}

/// Discounts from counts-of-counts, 0.5 whenever a formula is undefined or
/// leaves its admissible range.
pub fn discounts(counts: &[u64]) -> [f64; 3] {
    let n = |k: u64| counts.iter().filter(|&&c| c == k).count() as f64;
    let (n1, n2, n3, n4) = (n(1), n(2), n(3), n(4));
    let y = if n1 + 2.0 * n2 > 0.0 { n1 / (n1 + 2.0 * n2) } else { 0.0 };
    let pick = |num: f64, den: f64, cap: f64| {
        if den == 0.0 {
            return 0.5;
        }
        let d = num;
        if d > 0.0 && d <= cap {
            d
        } else {
            0.5
        }
    };
    [
        pick(if n1 > 0.0 { 1.0 - 2.0 * y * n2 / n1 } else { 0.0 }, n1, 1.0),
        pick(if n2 > 0.0 { 2.0 - 3.0 * y * n3 / n2 } else { 0.0 }, n2, 2.0),
        pick(if n3 > 0.0 { 3.0 - 4.0 * y * n4 / n3 } else { 0.0 }, n3, 3.0),
    ]
}

fn d_of(d: &[f64; 3], c: u64) -> f64 {
    match c {
        0 => 0.0,
        1 => d[0],
        2 => d[1],
        _ => d[2],
    }
}

/// Interpolated modified Kneser-Ney evaluated straight from the textbook
/// recursion, with continuation counts at the lower orders and a uniform
/// floor over the `n + 1` predictable symbols.
pub struct KnOracle {
    ev: Vec<(u32, u32, u32)>,
    n_pred: usize,
    d3: [f64; 3],
    d2: [f64; 3],
    d1: [f64; 3],
}

impl KnOracle {
    pub fn new(seqs: &[Vec<u32>], n: usize) -> Self {
        let ev = events(seqs, n);
        let tri_types = distinct(ev.iter().copied());
        let tri_counts: Vec<u64> = tri_types
            .iter()
            .map(|t| ev.iter().filter(|e| *e == t).count() as u64)
            .collect();
        let bi_types = distinct(tri_types.iter().map(|&(_, v, w)| (v, w)));
        let bi_cont: Vec<u64> = bi_types
            .iter()
            .map(|&(v, w)| tri_types.iter().filter(|t| t.1 == v && t.2 == w).count() as u64)
            .collect();
        let uni_types = distinct(bi_types.iter().map(|&(_, w)| w));
        let uni_cont: Vec<u64> = uni_types
            .iter()
            .map(|&w| bi_types.iter().filter(|b| b.1 == w).count() as u64)
            .collect();
        KnOracle {
            d3: discounts(&tri_counts),
            d2: discounts(&bi_cont),
            d1: discounts(&uni_cont),
            ev,
            n_pred: n + 1,
        }
    }

    fn c3(&self, u: u32, v: u32, w: u32) -> u64 {
        self.ev.iter().filter(|e| **e == (u, v, w)).count() as u64
    }

    /// N1+(• v w)
    fn n_vw(&self, v: u32, w: u32) -> u64 {
        distinct(self.ev.iter().filter(|e| e.1 == v && e.2 == w).map(|e| e.0)).len() as u64
    }

    /// N1+(• w) over bigram types.
    fn n_w(&self, w: u32) -> u64 {
        distinct(self.ev.iter().filter(|e| e.2 == w).map(|e| e.1)).len() as u64
    }

    fn gamma(d: &[f64; 3], counts: &[u64]) -> f64 {
        let total: u64 = counts.iter().sum();
        counts.iter().map(|&c| d_of(d, c)).sum::<f64>() / total as f64
    }

    pub fn p1(&self, w: u32) -> f64 {
        let ws = distinct(self.ev.iter().map(|e| e.2));
        let counts: Vec<u64> = ws.iter().map(|&x| self.n_w(x)).collect();
        let total: u64 = counts.iter().sum();
        let c = self.n_w(w);
        (c as f64 - d_of(&self.d1, c)).max(0.0) / total as f64
            + Self::gamma(&self.d1, &counts) / self.n_pred as f64
    }

    pub fn p2(&self, v: u32, w: u32) -> f64 {
        let ws = distinct(self.ev.iter().filter(|e| e.1 == v).map(|e| e.2));
        if ws.is_empty() {
            return self.p1(w);
        }
        let counts: Vec<u64> = ws.iter().map(|&x| self.n_vw(v, x)).collect();
        let total: u64 = counts.iter().sum();
        let c = self.n_vw(v, w);
        (c as f64 - d_of(&self.d2, c)).max(0.0) / total as f64 + Self::gamma(&self.d2, &counts) * self.p1(w)
    }

    pub fn p3(&self, u: u32, v: u32, w: u32) -> f64 {
        let ws = distinct(self.ev.iter().filter(|e| e.0 == u && e.1 == v).map(|e| e.2));
        if ws.is_empty() {
            return self.p2(v, w);
        }
        let counts: Vec<u64> = ws.iter().map(|&x| self.c3(u, v, x)).collect();
        let total: u64 = counts.iter().sum();
        let c = self.c3(u, v, w);
        (c as f64 - d_of(&self.d3, c)).max(0.0) / total as f64 + Self::gamma(&self.d3, &counts) * self.p2(v, w)
    }
}

/// Witten-Bell evaluated from its recursive definition.
pub struct WbOracle {
    ev: Vec<(u32, u32, u32)>,
    n_pred: usize,
}

impl WbOracle {
    pub fn new(seqs: &[Vec<u32>], n: usize) -> Self {
        WbOracle {
            ev: events(seqs, n),
            n_pred: n + 1,
        }
    }

    pub fn p1(&self, w: u32) -> f64 {
        let total = self.ev.len() as f64;
        let types = distinct(self.ev.iter().map(|e| e.2)).len() as f64;
        let c = self.ev.iter().filter(|e| e.2 == w).count() as f64;
        (c + types / self.n_pred as f64) / (total + types)
    }

    pub fn p2(&self, v: u32, w: u32) -> f64 {
        let ctx: Vec<_> = self.ev.iter().filter(|e| e.1 == v).collect();
        if ctx.is_empty() {
            return self.p1(w);
        }
        let t = distinct(ctx.iter().map(|e| e.2)).len() as f64;
        let c = ctx.iter().filter(|e| e.2 == w).count() as f64;
        (c + t * self.p1(w)) / (ctx.len() as f64 + t)
    }

    pub fn p3(&self, u: u32, v: u32, w: u32) -> f64 {
        let ctx: Vec<_> = self.ev.iter().filter(|e| e.0 == u && e.1 == v).collect();
        if ctx.is_empty() {
            return self.p2(v, w);
        }
        let t = distinct(ctx.iter().map(|e| e.2)).len() as f64;
        let c = ctx.iter().filter(|e| e.2 == w).count() as f64;
        (c + t * self.p2(v, w)) / (ctx.len() as f64 + t)
    }
}

/// k-index straight from its definition.
pub fn brute_k_index(karma: &[i64]) -> u64 {
    (0..=karma.len() as u64)
        .filter(|&k| karma.iter().filter(|&&x| x > k as i64).count() as u64 >= k)
        .max()
        .unwrap_or(0)
}

/// Average ranks by counting, O(n²).
pub fn reference_ranks(x: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|&xi| {
            let below = x.iter().filter(|&&xj| xj < xi).count() as f64;
            let equal = x.iter().filter(|&&xj| xj == xi).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect()
}

/// Rank-then-Pearson Spearman correlation.
pub fn reference_spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    let rx = reference_ranks(x);
    let ry = reference_ranks(y);
    let n = x.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        None
    } else {
        Some(cov / (vx * vy).sqrt())
    }
}

/// Symbol sequences over `{a, b, c, ...}` from whitespace-separated text,
/// one sequence per line.
pub fn toy_sequences(text: &str, alphabet: &[&str]) -> Vec<Vec<u32>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.split_whitespace()
                .map(|w| alphabet.iter().position(|a| *a == w).expect("symbol in alphabet") as u32)
                .collect()
        })
        .collect()
}

pub mod experiment;
