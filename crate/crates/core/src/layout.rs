//! Index tables for truncated multivariate Taylor series.
//!
//! Monomials in `n` variables of total degree at most `order` are listed by
//! degree, then lexicographically. Because the listing is degree-major, the
//! table for a lower order is a prefix of the table for a higher one, so
//! truncation never has to remap indices.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

#[derive(Debug)]
pub struct Layout {
    pub nvars: usize,
    pub order: usize,
    monos: Vec<Vec<u8>>,
    /// `(i, j, k)` with `mono[i]·mono[j] = mono[k]`.
    pub pairs: Vec<(u32, u32, u32)>,
    /// `shift[v][i]`: index of `mono[i]·x_v`, for monomials of degree `< order`.
    shift: Vec<Vec<u32>>,
    /// Number of monomials of degree `≤ d`, for `d = 0..=order`.
    upto: Vec<usize>,
}

fn monos_of_degree(nvars: usize, d: usize) -> Vec<Vec<u8>> {
    // lexicographic with variable 0 most significant, descending exponent of var 0 first
    fn rec(nvars: usize, d: usize, prefix: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if prefix.len() == nvars - 1 {
            prefix.push(d as u8);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in (0..=d).rev() {
            prefix.push(e as u8);
            rec(nvars, d - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if nvars == 0 {
        if d == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(nvars, d, &mut Vec::with_capacity(nvars), &mut out);
    out
}

impl Layout {
    fn build(nvars: usize, order: usize) -> Self {
        let mut monos = Vec::new();
        let mut upto = Vec::with_capacity(order + 1);
        for d in 0..=order {
            monos.extend(monos_of_degree(nvars, d));
            upto.push(monos.len());
        }
        let index: HashMap<Vec<u8>, u32> = monos.iter().enumerate().map(|(i, m)| (m.clone(), i as u32)).collect();
        let deg = |m: &Vec<u8>| m.iter().map(|&e| e as usize).sum::<usize>();
        let mut pairs = Vec::new();
        for (i, a) in monos.iter().enumerate() {
            for (j, b) in monos.iter().enumerate() {
                if deg(a) + deg(b) > order {
                    // monomials are degree-sorted, so every later b is too big as well
                    break;
                }
                let prod: Vec<u8> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                pairs.push((i as u32, j as u32, index[&prod]));
            }
        }
        let below = if order == 0 { 0 } else { upto[order - 1] };
        let shift = (0..nvars)
            .map(|v| {
                monos[..below]
                    .iter()
                    .map(|m| {
                        let mut up = m.clone();
                        up[v] += 1;
                        index[&up]
                    })
                    .collect()
            })
            .collect();
        Layout {
            nvars,
            order,
            monos,
            pairs,
            shift,
            upto,
        }
    }

    /// Shared table for `(nvars, order)`.
    pub fn get(nvars: usize, order: usize) -> Arc<Layout> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<Layout>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("layout cache poisoned");
        guard
            .entry((nvars, order))
            .or_insert_with(|| Arc::new(Layout::build(nvars, order)))
            .clone()
    }

    pub fn len(&self) -> usize {
        self.monos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monos.is_empty()
    }

    /// Number of monomials of degree at most `d` (clamped to the order).
    pub fn len_upto(&self, d: usize) -> usize {
        self.upto[d.min(self.order)]
    }

    pub fn mono(&self, i: usize) -> &[u8] {
        &self.monos[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.monos[i].iter().map(|&e| e as usize).sum()
    }

    /// Index of `mono[i]·x_v`; requires `degree(i) < order`.
    pub fn shift(&self, v: usize, i: usize) -> usize {
        self.shift[v][i] as usize
    }

    /// Index of the monomial `x_v` (degree one).
    pub fn var_index(&self, v: usize) -> usize {
        debug_assert!(self.order >= 1);
        self.shift[v][0] as usize
    }

    pub fn index_of(&self, exps: &[u8]) -> Option<usize> {
        let d: usize = exps.iter().map(|&e| e as usize).sum();
        if d > self.order {
            return None;
        }
        let start = if d == 0 { 0 } else { self.upto[d - 1] };
        (start..self.upto[d]).find(|&i| self.monos[i] == exps)
    }
}
