use std::fmt;

use rand::Rng;

use super::chain::{AbstractChain, Generator};
use super::cube::{cube_boundary, CubeFace, FaceCoord};

/// Dimensions of the critical sets `B_0, B_1, ...`; `None` marks an empty set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BaseDims {
    dims: Vec<Option<usize>>,
}

impl BaseDims {
    pub fn new(dims: Vec<Option<usize>>) -> Self {
        Self { dims }
    }

    pub fn dim(&self, n: usize) -> Option<usize> {
        self.dims.get(n).copied().flatten()
    }

    pub fn is_populated(&self, n: usize) -> bool {
        self.dim(n).is_some()
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }
}

/// One factor of a fibered word.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Factor {
    /// A cube face regarded as a chain on `B_base`.
    Cube { face: CubeFace, base: usize },
    /// The compactified moduli space `M̄(B_from, B_to)`; `b_from = dim B_from`.
    Moduli { from: usize, to: usize, b_from: usize },
}

impl Factor {
    fn degree(&self) -> i64 {
        match self {
            Factor::Cube { face, .. } => face.degree() as i64,
            Factor::Moduli { from, to, b_from } => (*from - *to) as i64 + *b_from as i64 - 1,
        }
    }

    fn source(&self) -> usize {
        match self {
            Factor::Cube { base, .. } => *base,
            Factor::Moduli { from, .. } => *from,
        }
    }

    fn target(&self) -> usize {
        match self {
            Factor::Cube { base, .. } => *base,
            Factor::Moduli { to, .. } => *to,
        }
    }
}

impl fmt::Debug for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Factor::Cube { face, base } => write!(f, "{face:?}@B{base}"),
            Factor::Moduli { from, to, .. } => write!(f, "M({from},{to})"),
        }
    }
}

/// A left-associated fibered product word
/// `Q ×_{B_{i_1}} M̄(B_{i_1}, B_{i_2}) ×_{B_{i_2}} ⋯`.
///
/// A cube factor may only appear first. Moduli indices are strictly
/// decreasing and consecutive factors share their junction set.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FiberedSymbol {
    factors: Vec<Factor>,
}

impl FiberedSymbol {
    /// Validates and builds a word. Returns `None` for malformed words.
    pub fn new(factors: Vec<Factor>) -> Option<Self> {
        if factors.is_empty() {
            return None;
        }
        for (k, f) in factors.iter().enumerate() {
            match f {
                Factor::Cube { .. } if k > 0 => return None,
                Factor::Moduli { from, to, .. } if from <= to => return None,
                _ => {}
            }
            if k > 0 && factors[k - 1].target() != f.source() {
                return None;
            }
        }
        Some(Self { factors })
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    /// Dimension of the junction set between factor `k - 1` and factor `k`.
    fn junction_dim(&self, k: usize) -> i64 {
        match &self.factors[k] {
            Factor::Moduli { b_from, .. } => *b_from as i64,
            Factor::Cube { .. } => unreachable!("cube factors only appear first"),
        }
    }

    fn signed_degree(&self) -> i64 {
        let sum: i64 = self.factors.iter().map(Factor::degree).sum();
        let junctions: i64 = (1..self.factors.len()).map(|k| self.junction_dim(k)).sum();
        sum - junctions
    }

    fn concat(&self, other: &Self) -> Self {
        let mut factors = self.factors.clone();
        factors.extend_from_slice(&other.factors);
        Self::new(factors).expect("concatenation of compatible words")
    }

    fn slice(&self, range: std::ops::Range<usize>) -> Self {
        Self {
            factors: self.factors[range].to_vec(),
        }
    }
}

impl Generator for FiberedSymbol {
    fn degree(&self) -> usize {
        let d = self.signed_degree();
        assert!(d >= 0, "word {self:?} has negative degree");
        d as usize
    }
}

impl fmt::Debug for FiberedSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, factor) in self.factors.iter().enumerate() {
            if k > 0 {
                write!(f, "×")?;
            }
            write!(f, "{factor:?}")?;
        }
        Ok(())
    }
}

/// Choice of the two signs in the moduli and fibered-product boundaries.
///
/// The standard conventions make `∂∂ = 0`. The mutated variants exist so the
/// test suite can show that each sign is load-bearing.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SignConventions {
    pub moduli: ModuliSign,
    pub fibered: FiberedSign,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ModuliSign {
    /// `(−1)^{i + b_i}`
    #[default]
    Standard,
    /// `(−1)^{i + b_i}` negated whenever `b_i` is odd, i.e. `(−1)^i`.
    FlippedOnOddBase,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FiberedSign {
    /// `(−1)^{p_1 + b}`
    #[default]
    Standard,
    /// `−(−1)^{p_1 + b}`
    Flipped,
}

impl SignConventions {
    fn moduli_sign(&self, i: usize, b_i: usize) -> i64 {
        let e = match self.moduli {
            ModuliSign::Standard => i + b_i,
            ModuliSign::FlippedOnOddBase => i,
        };
        parity_sign(e as i64)
    }

    fn fibered_sign(&self, p1: i64, b: i64) -> i64 {
        let s = parity_sign(p1 + b);
        match self.fibered {
            FiberedSign::Standard => s,
            FiberedSign::Flipped => -s,
        }
    }
}

fn parity_sign(e: i64) -> i64 {
    if e.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

/// `∂M̄(B_i, B_{i−j}) = (−1)^{i+b_i} Σ_{i−j<n<i} M̄(B_i, B_n) ×_{B_n} M̄(B_n, B_{i−j})`,
/// dropping terms whose intermediate set `B_n` is empty.
///
/// Panics unless `1 ≤ j ≤ i` and both `B_i` and `B_{i−j}` are populated.
pub fn moduli_boundary(i: usize, j: usize, bases: &BaseDims, signs: &SignConventions) -> AbstractChain<FiberedSymbol> {
    assert!(1 <= j && j <= i, "moduli boundary needs 1 <= j <= i");
    let b_i = bases.dim(i).expect("B_i populated");
    bases.dim(i - j).expect("B_{i-j} populated");
    let degree = (j + b_i - 1).checked_sub(1);
    let Some(degree) = degree else {
        // Degree-zero moduli space: the boundary is empty.
        return AbstractChain::zero(0);
    };
    let mut out = AbstractChain::zero(degree);
    let sign = signs.moduli_sign(i, b_i);
    for n in (i - j + 1)..i {
        let Some(b_n) = bases.dim(n) else { continue };
        let word = FiberedSymbol::new(vec![
            Factor::Moduli {
                from: i,
                to: n,
                b_from: b_i,
            },
            Factor::Moduli {
                from: n,
                to: i - j,
                b_from: b_n,
            },
        ])
        .expect("well-formed pair");
        out.add_term(word, sign);
    }
    out
}

fn factor_boundary(f: &Factor, bases: &BaseDims, signs: &SignConventions) -> Option<AbstractChain<FiberedSymbol>> {
    match f {
        Factor::Cube { face, base } => {
            let d = cube_boundary(face).ok()?;
            Some(d.map_linear(d.degree(), |g| {
                AbstractChain::from_generator(
                    FiberedSymbol::new(vec![Factor::Cube {
                        face: g.clone(),
                        base: *base,
                    }])
                    .expect("single cube word"),
                )
            }))
        }
        Factor::Moduli { from, to, .. } => {
            let d = moduli_boundary(*from, from - to, bases, signs);
            if d.is_zero() {
                None
            } else {
                Some(d)
            }
        }
    }
}

/// Which way a word is bracketed when its boundary is expanded.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Association {
    /// `((F_1 × F_2) × F_3) × ⋯`
    Left,
    /// `F_1 × (F_2 × (F_3 × ⋯))`
    Right,
}

/// Boundary of a fibered word by repeated use of
/// `∂(P_1 ×_B P_2) = ∂P_1 ×_B P_2 + (−1)^{p_1+b} P_1 ×_B ∂P_2`.
pub fn fibered_boundary(
    w: &FiberedSymbol,
    bases: &BaseDims,
    signs: &SignConventions,
    assoc: Association,
) -> AbstractChain<FiberedSymbol> {
    let target = w.signed_degree() - 1;
    let mut out = AbstractChain::zero(target.max(0) as usize);
    if target < 0 {
        return out;
    }
    let n = w.factors.len();
    if n == 1 {
        if let Some(d) = factor_boundary(&w.factors[0], bases, signs) {
            out.add_chain(&d, 1);
        }
        return out;
    }
    let split = match assoc {
        Association::Left => n - 1,
        Association::Right => 1,
    };
    let (p1, p2) = (w.slice(0..split), w.slice(split..n));
    let b = w.junction_dim(split);
    let d1 = fibered_boundary(&p1, bases, signs, assoc);
    for (g, c) in d1.terms() {
        out.add_term(g.concat(&p2), c);
    }
    let sign = signs.fibered_sign(p1.signed_degree(), b);
    let d2 = fibered_boundary(&p2, bases, signs, assoc);
    for (g, c) in d2.terms() {
        out.add_term(p1.concat(g), sign * c);
    }
    out
}

/// Boundary extended linearly to chains of words.
pub fn fibered_chain_boundary(
    c: &AbstractChain<FiberedSymbol>,
    bases: &BaseDims,
    signs: &SignConventions,
    assoc: Association,
) -> AbstractChain<FiberedSymbol> {
    let target = c.degree().saturating_sub(1);
    c.map_linear(target, |g| fibered_boundary(g, bases, signs, assoc))
}

/// `∂∂` of a single word (left association).
pub fn boundary_squared(w: &FiberedSymbol, bases: &BaseDims, signs: &SignConventions) -> AbstractChain<FiberedSymbol> {
    let d = fibered_boundary(w, bases, signs, Association::Left);
    fibered_chain_boundary(&d, bases, signs, Association::Left)
}

/// `∂∂ M̄(B_i, B_{i−j})`.
pub fn moduli_boundary_squared(
    i: usize,
    j: usize,
    bases: &BaseDims,
    signs: &SignConventions,
) -> AbstractChain<FiberedSymbol> {
    let d = moduli_boundary(i, j, bases, signs);
    fibered_chain_boundary(&d, bases, signs, Association::Left)
}

/// Every `(i, j, bases)` configuration with `i ≤ max_i`: all population
/// patterns of the intermediate sets and all base dimensions in `{0, 1}` on
/// the sets involved, plus the uniform assignment `b = 2`.
pub fn exhaustive_moduli_cases(max_i: usize) -> Vec<(usize, usize, BaseDims)> {
    let mut cases = Vec::new();
    for i in 1..=max_i {
        for j in 1..=i {
            let lo = i - j;
            let inner = j - 1;
            for pop in 0u32..(1 << inner) {
                let populated = |n: usize| n == lo || n == i || pop >> (n - lo - 1) & 1 == 1;
                let mut assignments: Vec<Vec<usize>> = (0u32..(1 << (j + 1)))
                    .map(|bits| (0..=j).map(|k| (bits >> k & 1) as usize).collect())
                    .collect();
                assignments.push(vec![2; j + 1]);
                for dims in assignments {
                    let v = (0..=i)
                        .map(|n| {
                            if n >= lo && populated(n) {
                                Some(dims[n - lo])
                            } else {
                                None
                            }
                        })
                        .collect();
                    cases.push((i, j, BaseDims::new(v)));
                }
            }
        }
    }
    cases
}

/// A random well-formed word with `factor_count` factors (at least one),
/// together with base dimensions making it valid. With probability one half
/// the word starts with a cube face of `I^N`, `N ≤ 4`.
pub fn random_word<R: Rng>(rng: &mut R, factor_count: usize) -> (FiberedSymbol, BaseDims) {
    assert!(factor_count >= 1);
    let with_cube = factor_count == 1 || rng.gen_bool(0.5);
    let moduli_count = if with_cube { factor_count - 1 } else { factor_count };
    let top = moduli_count + rng.gen_range(0..=2usize);
    let mut dims: Vec<Option<usize>> = (0..=top)
        .map(|_| {
            if rng.gen_bool(0.75) {
                Some(rng.gen_range(0..=2))
            } else {
                None
            }
        })
        .collect();
    // Strictly decreasing chain of indices through the word.
    let mut chain: Vec<usize> = (0..=top).collect();
    while chain.len() > moduli_count + 1 {
        let k = rng.gen_range(0..chain.len());
        chain.remove(k);
    }
    chain.reverse();
    for &n in &chain {
        if dims[n].is_none() {
            dims[n] = Some(rng.gen_range(0..=2));
        }
    }
    let bases = BaseDims::new(dims);
    let mut factors = Vec::new();
    if with_cube {
        let n = rng.gen_range(1..=4);
        let coords = (0..n)
            .map(|_| match rng.gen_range(0..3) {
                0 => FaceCoord::Free,
                1 => FaceCoord::Zero,
                _ => FaceCoord::One,
            })
            .collect();
        factors.push(Factor::Cube {
            face: CubeFace::new(coords),
            base: chain[0],
        });
    }
    for w in chain.windows(2) {
        factors.push(Factor::Moduli {
            from: w[0],
            to: w[1],
            b_from: bases.dim(w[0]).expect("chain indices populated"),
        });
    }
    (
        FiberedSymbol::new(factors).expect("generated word is well formed"),
        bases,
    )
}
