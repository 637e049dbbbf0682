use std::fmt;

use super::chain::{AbstractChain, Generator};
use crate::error::{Error, Result};

/// State of one coordinate of a face of the standard cube `I^N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FaceCoord {
    Free,
    Zero,
    One,
}

/// A face of `I^N`: each coordinate is free or pinned to 0 or 1.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CubeFace {
    coords: Vec<FaceCoord>,
}

impl CubeFace {
    pub fn new(coords: Vec<FaceCoord>) -> Self {
        Self { coords }
    }

    /// The top face `I^N` itself.
    pub fn full(n: usize) -> Self {
        Self::new(vec![FaceCoord::Free; n])
    }

    pub fn ambient_dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[FaceCoord] {
        &self.coords
    }

    /// Positions of the free coordinates, in increasing order.
    pub fn free_positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.coords
            .iter()
            .enumerate()
            .filter(|(_, c)| **c == FaceCoord::Free)
            .map(|(i, _)| i)
    }

    fn restrict(&self, pos: usize, value: FaceCoord) -> Self {
        let mut c = self.coords.clone();
        c[pos] = value;
        Self::new(c)
    }

    /// All `3^N` faces of `I^N`.
    pub fn all_faces(n: usize) -> Vec<Self> {
        let total = 3usize.pow(n as u32);
        (0..total)
            .map(|mut code| {
                let coords = (0..n)
                    .map(|_| {
                        let c = match code % 3 {
                            0 => FaceCoord::Free,
                            1 => FaceCoord::Zero,
                            _ => FaceCoord::One,
                        };
                        code /= 3;
                        c
                    })
                    .collect();
                Self::new(coords)
            })
            .collect()
    }
}

impl Generator for CubeFace {
    fn degree(&self) -> usize {
        self.coords.iter().filter(|c| **c == FaceCoord::Free).count()
    }
}

impl fmt::Debug for CubeFace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.coords {
            let ch = match c {
                FaceCoord::Free => '*',
                FaceCoord::Zero => '0',
                FaceCoord::One => '1',
            };
            write!(f, "{ch}")?;
        }
        Ok(())
    }
}

/// `∂P = Σ_{j=1}^{p} (−1)^j [P|_{x_j=1} − P|_{x_j=0}]`, with `x_j` the j-th free
/// coordinate of `P`.
pub fn cube_boundary(p: &CubeFace) -> Result<AbstractChain<CubeFace>> {
    let deg = p.degree();
    if deg == 0 {
        return Err(Error::DegreeZero);
    }
    let mut out = AbstractChain::zero(deg - 1);
    for (j, pos) in p.free_positions().enumerate() {
        let sign = if (j + 1) % 2 == 0 { 1 } else { -1 };
        out.add_term(p.restrict(pos, FaceCoord::One), sign);
        out.add_term(p.restrict(pos, FaceCoord::Zero), -sign);
    }
    Ok(out)
}

/// Boundary extended to chains; degree-zero generators map to zero.
pub fn cube_chain_boundary(c: &AbstractChain<CubeFace>) -> AbstractChain<CubeFace> {
    let target = c.degree().saturating_sub(1);
    c.map_linear(target, |g| {
        cube_boundary(g).unwrap_or_else(|_| AbstractChain::zero(target))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use FaceCoord::*;

    #[test]
    fn square() {
        // A_j: x_j = 1, B_j: x_j = 0.
        let sq = CubeFace::full(2);
        let d = cube_boundary(&sq).unwrap();
        let a1 = CubeFace::new(vec![One, Free]);
        let b1 = CubeFace::new(vec![Zero, Free]);
        let a2 = CubeFace::new(vec![Free, One]);
        let b2 = CubeFace::new(vec![Free, Zero]);
        assert_eq!(d.coefficient(&a1), -1);
        assert_eq!(d.coefficient(&b1), 1);
        assert_eq!(d.coefficient(&a2), 1);
        assert_eq!(d.coefficient(&b2), -1);
        assert_eq!(d.len(), 4);
    }

    #[test]
    fn edge() {
        let e = CubeFace::full(1);
        let d = cube_boundary(&e).unwrap();
        assert_eq!(d.coefficient(&CubeFace::new(vec![One])), -1);
        assert_eq!(d.coefficient(&CubeFace::new(vec![Zero])), 1);
    }

    #[test]
    fn vertex_has_no_boundary() {
        assert_eq!(cube_boundary(&CubeFace::new(vec![Zero, One])), Err(Error::DegreeZero));
    }

    #[test]
    fn boundary_squared_vanishes_on_i4() {
        for face in CubeFace::all_faces(4) {
            let c = AbstractChain::from_generator(face.clone());
            let dd = cube_chain_boundary(&cube_chain_boundary(&c));
            assert!(dd.is_zero(), "∂∂{face:?} = {dd:?}");
        }
    }

    #[test]
    fn face_count() {
        assert_eq!(CubeFace::all_faces(3).len(), 27);
    }
}
