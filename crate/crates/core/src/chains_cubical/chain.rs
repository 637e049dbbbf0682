use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

/// A generator of a chain group: anything ordered that knows its degree.
pub trait Generator: Ord + Clone + fmt::Debug {
    fn degree(&self) -> usize;
}

/// Formal integer combination of generators of a single degree.
#[derive(Clone, PartialEq, Eq)]
pub struct AbstractChain<G: Generator> {
    degree: usize,
    terms: BTreeMap<G, i64>,
}

impl<G: Generator> AbstractChain<G> {
    pub fn zero(degree: usize) -> Self {
        Self {
            degree,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_generator(g: G) -> Self {
        let mut c = Self::zero(g.degree());
        c.add_term(g, 1);
        c
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, g: &G) -> i64 {
        self.terms.get(g).copied().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&G, i64)> {
        self.terms.iter().map(|(g, &c)| (g, c))
    }

    /// Adds `coeff * g`. Panics if `g` has the wrong degree.
    pub fn add_term(&mut self, g: G, coeff: i64) {
        assert_eq!(
            g.degree(),
            self.degree,
            "generator {g:?} has degree {}, chain has degree {}",
            g.degree(),
            self.degree
        );
        if coeff == 0 {
            return;
        }
        match self.terms.entry(g) {
            Entry::Vacant(v) => {
                v.insert(coeff);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += coeff;
                if *o.get() == 0 {
                    o.remove();
                }
            }
        }
    }

    /// Adds `scale * other`.
    pub fn add_chain(&mut self, other: &Self, scale: i64) {
        for (g, c) in other.terms() {
            self.add_term(g.clone(), c * scale);
        }
    }

    /// Applies a linear map given on generators.
    pub fn map_linear<H: Generator>(
        &self,
        target_degree: usize,
        mut f: impl FnMut(&G) -> AbstractChain<H>,
    ) -> AbstractChain<H> {
        let mut out = AbstractChain::zero(target_degree);
        for (g, c) in self.terms() {
            let image = f(g);
            if !image.is_zero() {
                assert_eq!(image.degree(), target_degree, "linear map changed target degree");
            }
            out.add_chain(&image, c);
        }
        out
    }
}

impl<G: Generator> fmt::Debug for AbstractChain<G> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0[deg {}]", self.degree);
        }
        let mut first = true;
        for (g, c) in self.terms() {
            if !first {
                write!(f, " ")?;
            }
            first = false;
            write!(f, "{c:+}·{g:?}")?;
        }
        Ok(())
    }
}
