//! Table-free gate action on `B_4` in the frame of ordered Majorana
//! monomials.
//!
//! For `|S| = 4` the monomial `c_S` is Hermitian, so it differs from the
//! basis word `P_S` by a sign `ω_S`. In coefficients `v'_S = ω_S v_S` the
//! pair `(S ∪ {a}, S ∪ {b})` of a generator with support `a < b` rotates with
//! a sign fixed by `|S ∩ (a, b)|` alone. Splitting `S` into the parts below
//! `a`, between `a` and `b`, and above `b`, the part below `a` runs over a
//! contiguous block of colex ranks, so a gate is a list of runs
//! `(o_a + r, o_b + r)` for `r < C(a, |L|)` that is generated on the fly.

use std::ops::Range;

use crate::algebra::Phase;
use crate::circuit::{GateTable, Generator};
use crate::combinatorics::{binomial, for_each_subset, unrank, ColexRanker};
use crate::error::{Error, Result};
use crate::modspace::{basis_pauli, dim_module};
use crate::scalar::Scalar;

const KAPPA: usize = 4;

/// `ω_S` with `c_S = ω_S P_S` for a sorted 4-subset.
pub(crate) fn frame_sign(indices: &[usize], n: usize) -> i8 {
    let p = crate::algebra::majorana_product_raw(indices.iter().copied(), n);
    p.phase()
        .sign()
        .expect("quartic Majorana monomials are Hermitian")
}

/// Calls `f(rank, ω)` for every element of `B_4`.
pub(crate) fn for_each_frame_sign(n: usize, mut f: impl FnMut(usize, i8)) {
    let ranker = ColexRanker::new(2 * n);
    for_each_subset(2 * n, KAPPA, |s| f(ranker.rank(s), frame_sign(s, n)));
}

/// Multiplies every coefficient by its `ω`; the map is its own inverse.
pub(crate) fn to_frame<T: Scalar>(v: &mut [T], n: usize) {
    for_each_frame_sign(n, |r, w| {
        if w < 0 {
            v[r] = -v[r];
        }
    });
}

/// Zeroed buffer marked for transparent huge pages where supported. Gate
/// runs hit module vectors with wide strides, and with 4 KiB pages those
/// accesses are dominated by TLB misses once the vector leaves the cache.
pub(crate) fn zeroed_buffer<E: Clone>(len: usize, zero: E) -> Vec<E> {
    let v = vec![zero; len];
    advise_huge_pages(&v);
    v
}

/// Copy of `src` in a buffer from [`zeroed_buffer`].
pub(crate) fn buffer_from<T: Scalar>(src: &[T]) -> Vec<T> {
    let mut v = zeroed_buffer(src.len(), T::zero());
    v.copy_from_slice(src);
    v
}

#[cfg(target_os = "linux")]
fn advise_huge_pages<T>(v: &[T]) {
    const HUGE_PAGE: usize = 2 << 20;
    let bytes = std::mem::size_of_val(v);
    if bytes < 2 * HUGE_PAGE {
        return;
    }
    // SAFETY: sysconf has no preconditions.
    let page = usize::try_from(unsafe { libc::sysconf(libc::_SC_PAGESIZE) }).unwrap_or(4096);
    let start = v.as_ptr() as usize;
    let lo = (start + page - 1) & !(page - 1);
    let hi = (start + bytes) & !(page - 1);
    // SAFETY: [lo, hi) is page aligned and lies inside the allocation;
    // MADV_HUGEPAGE changes the paging policy, never the contents. Failure
    // leaves ordinary pages in place.
    unsafe {
        libc::madvise(lo as *mut libc::c_void, hi - lo, libc::MADV_HUGEPAGE);
    }
}

#[cfg(not(target_os = "linux"))]
fn advise_huge_pages<T>(_: &[T]) {}

/// One family of runs: fixed `|L|`, fixed middle part, every `H` of size
/// `k_h` above `b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct RunClass {
    off_a: usize,
    off_b: usize,
    len: usize,
    k_h: usize,
    pos_h: usize,
    negative: bool,
}

/// Run decomposition of one generator on `B_4`.
#[derive(Clone, Debug, PartialEq)]
pub struct RunGate {
    generator: Generator,
    top: usize,
    classes: Vec<RunClass>,
    binom: Vec<[usize; 5]>,
}

impl RunGate {
    pub fn new(generator: &Generator) -> Result<Self> {
        let n = generator.n();
        if 2 * n < KAPPA || dim_module(KAPPA, n) > u32::MAX as usize {
            return Err(Error::UnsupportedGrade(KAPPA));
        }
        let (a, b) = generator.support();
        let total = 2 * n;
        let binom: Vec<[usize; 5]> = (0..=total)
            .map(|h| std::array::from_fn(|k| binomial(h, k)))
            .collect();
        let i_gamma = generator.pauli().with_phase(Phase::I);
        let between: Vec<usize> = (a + 1..b).collect();
        let mut classes = Vec::new();
        for k_m in 0..KAPPA.min(between.len() + 1) {
            for_each_subset(between.len(), k_m, |pick| {
                let m: Vec<usize> = pick.iter().map(|&i| between[i]).collect();
                for k_l in 0..KAPPA - k_m {
                    let k_h = KAPPA - 1 - k_m - k_l;
                    if k_l > a || k_h > total - b - 1 {
                        continue;
                    }
                    let off_a = binomial(a, k_l + 1)
                        + m.iter()
                            .enumerate()
                            .map(|(j, &x)| binomial(x, k_l + 2 + j))
                            .sum::<usize>();
                    let off_b = m
                        .iter()
                        .enumerate()
                        .map(|(j, &x)| binomial(x, k_l + 1 + j))
                        .sum::<usize>()
                        + binomial(b, k_l + k_m + 1);
                    // sign from the lowest representative of the class
                    let mut with_a: Vec<usize> = (0..k_l).collect();
                    with_a.push(a);
                    with_a.extend(&m);
                    with_a.extend(b + 1..b + 1 + k_h);
                    let mut with_b: Vec<usize> = (0..k_l).chain(m.iter().copied()).collect();
                    with_b.push(b);
                    with_b.extend(b + 1..b + 1 + k_h);
                    let image = i_gamma.mul_unchecked(&basis_pauli(&with_a, n));
                    debug_assert!(image.same_letters(&basis_pauli(&with_b, n)));
                    let s = image
                        .phase()
                        .sign()
                        .expect("i[γ, b] is Hermitian for anticommuting pairs")
                        * frame_sign(&with_a, n)
                        * frame_sign(&with_b, n);
                    classes.push(RunClass {
                        off_a,
                        off_b,
                        len: binomial(a, k_l),
                        k_h,
                        pos_h: k_l + k_m + 2,
                        negative: s < 0,
                    });
                }
            });
        }
        Ok(Self {
            generator: *generator,
            top: total,
            classes,
            binom,
        })
    }

    pub fn generator(&self) -> &Generator {
        &self.generator
    }

    pub fn pair_count(&self) -> usize {
        let lo = self.generator.support().1 + 1;
        self.classes
            .iter()
            .map(|c| c.len * binomial(self.top - lo, c.k_h))
            .sum()
    }

    /// Calls `f(o_a, o_b, len, negative)` once per run whose elements have
    /// their top Majorana in `tops`. The window must not split the support.
    #[inline]
    fn for_each_run(&self, tops: Range<usize>, mut f: impl FnMut(usize, usize, usize, bool)) {
        let (a, b) = self.generator.support();
        debug_assert!(
            tops.end <= a || tops.start > b || (tops.start <= a && b < tops.end),
            "window splits the support"
        );
        if tops.end <= a {
            return;
        }
        let lo = b + 1;
        let cross = tops.contains(&b);
        let end = tops.end.min(self.top);
        let bn = &self.binom;
        for c in &self.classes {
            let p = c.pos_h;
            let mut run = |base: usize| f(c.off_a + base, c.off_b + base, c.len, c.negative);
            match c.k_h {
                0 => {
                    if cross {
                        run(0)
                    }
                }
                1 => (tops.start.max(lo)..end).for_each(|h0| run(bn[h0][p])),
                2 => {
                    for h1 in tops.start.max(lo + 1)..end {
                        let b1 = bn[h1][p + 1];
                        (lo..h1).for_each(|h0| run(b1 + bn[h0][p]));
                    }
                }
                _ => {
                    for h2 in tops.start.max(lo + 2)..end {
                        let b2 = bn[h2][p + 2];
                        for h1 in lo + 1..h2 {
                            let b1 = b2 + bn[h1][p + 1];
                            (lo..h1).for_each(|h0| run(b1 + bn[h0][p]));
                        }
                    }
                }
            }
        }
    }

    /// All pairs `(l, l', sign)` in the monomial frame.
    pub fn pairs(&self) -> Vec<(usize, usize, i8)> {
        let mut out = Vec::with_capacity(self.pair_count());
        self.for_each_run(0..self.top, |oa, ob, len, neg| {
            out.extend((0..len).map(|r| (oa + r, ob + r, if neg { -1 } else { 1 })));
        });
        out
    }

    /// `v <- R(θ) v` in the monomial frame, `cos = cos 2θ`, `sin = sin 2θ`.
    pub fn rotate<T: Scalar>(&self, v: &mut [T], cos: T, sin: T) {
        self.rotate_window(v, 0..self.top, cos, sin);
    }

    /// [`RunGate::rotate`] restricted to elements whose top Majorana lies in
    /// `tops`.
    pub fn rotate_window<T: Scalar>(&self, v: &mut [T], tops: Range<usize>, cos: T, sin: T) {
        self.for_each_run(tops, |oa, ob, len, neg| {
            let s = if neg { -sin } else { sin };
            let (lo, hi) = v.split_at_mut(ob);
            for (x, y) in lo[oa..oa + len].iter_mut().zip(&mut hi[..len]) {
                let (a, b) = (*x, *y);
                *x = cos * a - s * b;
                *y = s * a + cos * b;
            }
        });
    }

    /// Reverse-sweep step on interleaved `[φ, λ]` coefficients: returns
    /// `λ · ∂φ/∂θ` and rotates both back through the gate.
    pub(crate) fn backprop<T: Scalar>(&self, joint: &mut [[T; 2]], cos: T, sin: T) -> T {
        self.backprop_window(joint, 0..self.top, cos, sin)
    }

    /// [`RunGate::backprop`] restricted to elements whose top Majorana lies
    /// in `tops`.
    pub(crate) fn backprop_window<T: Scalar>(
        &self,
        joint: &mut [[T; 2]],
        tops: Range<usize>,
        cos: T,
        sin: T,
    ) -> T {
        let mut acc = T::zero();
        self.for_each_run(tops, |oa, ob, len, neg| {
            let s = if neg { -sin } else { sin };
            let (lo, hi) = joint.split_at_mut(ob);
            let mut part = T::zero();
            for (p, q) in lo[oa..oa + len].iter_mut().zip(&mut hi[..len]) {
                let ([x, u], [y, w]) = (*p, *q);
                part = part + (w * x - u * y);
                *p = [cos * x + s * y, cos * u + s * w];
                *q = [cos * y - s * x, cos * w - s * u];
            }
            acc = if neg { acc - part } else { acc + part };
        });
        acc + acc
    }
}

/// Smallest rank range a window is coarsened to before it is closed.
pub(crate) const WINDOW_MIN_ELEMENTS: usize = 1 << 14;

/// Consecutive gates whose support intervals `[a, b]` are pairwise disjoint,
/// with a partition of the Majorana indices into windows that never split an
/// interval. Every pair of every gate in the layer keeps the top Majorana of
/// its elements inside one window, so the elements topped by a window form a
/// contiguous rank range closed under the whole layer and can be pushed
/// through all of its gates while they sit in cache.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Layer {
    pub gates: Range<usize>,
    pub windows: Vec<Range<usize>>,
}

/// Greedy layer split of a gate sequence given by support intervals;
/// windows are merged until they span at least `min_elements` ranks.
pub(crate) fn layers(supports: &[(usize, usize)], total: usize, min_elements: usize) -> Vec<Layer> {
    let mut out = Vec::new();
    let mut start = 0;
    for q in 0..=supports.len() {
        let fits = q < supports.len() && {
            let (a, b) = supports[q];
            supports[start..q].iter().all(|&(c, d)| b < c || d < a)
        };
        if !fits && q > start {
            out.push(Layer {
                gates: start..q,
                windows: windows(&supports[start..q], total, min_elements),
            });
            start = q;
        }
    }
    out
}

fn windows(supports: &[(usize, usize)], total: usize, min_elements: usize) -> Vec<Range<usize>> {
    let mut inside = vec![false; total + 1];
    for &(a, b) in supports {
        inside[a + 1..=b].iter_mut().for_each(|x| *x = true);
    }
    let mut out = Vec::new();
    let mut lo = 0;
    for (cut, &split) in inside.iter().enumerate().skip(1) {
        let big = binomial(cut, KAPPA) - binomial(lo, KAPPA) >= min_elements;
        if cut == total || (!split && big) {
            out.push(lo..cut);
            lo = cut;
        }
    }
    out
}

/// Explicit frame-space pair list, used when a gate carries a custom table.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct FramePairs(Vec<(u32, u32, bool)>);

impl FramePairs {
    pub(crate) fn from_table(table: &GateTable) -> Result<Self> {
        if table.kappa() != KAPPA {
            return Err(Error::ModuleMismatch {
                expected: KAPPA,
                got: table.kappa(),
            });
        }
        let n = table.generator().n();
        let w = |r: usize| -> Result<i8> { Ok(frame_sign(&unrank(r, KAPPA, 2 * n)?, n)) };
        let pairs = table
            .pairs()
            .map(|(l, h, s)| Ok((l as u32, h as u32, s * w(l)? * w(h)? < 0)))
            .collect::<Result<_>>()?;
        Ok(Self(pairs))
    }

    pub(crate) fn rotate<T: Scalar>(&self, v: &mut [T], cos: T, sin: T) {
        for &(l, h, neg) in &self.0 {
            let s = if neg { -sin } else { sin };
            let (l, h) = (l as usize, h as usize);
            let (a, b) = (v[l], v[h]);
            v[l] = cos * a - s * b;
            v[h] = s * a + cos * b;
        }
    }

    pub(crate) fn backprop<T: Scalar>(&self, joint: &mut [[T; 2]], cos: T, sin: T) -> T {
        let mut acc = T::zero();
        for &(l, h, neg) in &self.0 {
            let s = if neg { -sin } else { sin };
            let (l, h) = (l as usize, h as usize);
            let ([x, u], [y, w]) = (joint[l], joint[h]);
            let part = w * x - u * y;
            acc = if neg { acc - part } else { acc + part };
            joint[l] = [cos * x + s * y, cos * u + s * w];
            joint[h] = [cos * y - s * x, cos * w - s * u];
        }
        acc + acc
    }
}
