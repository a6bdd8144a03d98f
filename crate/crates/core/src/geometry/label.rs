//! Combinatorial labels for clipped Voronoi faces.
//!
//! A face is identified by the sorted set of generators whose cells contain it
//! and a bitmask of clip-box sides it lies on. Vertex coordinates are always
//! recomputed from the label, so every cell sharing a vertex sees bit-identical
//! coordinates.

use std::fmt;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

const EMPTY: u32 = u32::MAX;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label {
    gens: [u32; 4],
    len: u8,
    sides: u8,
}

impl Label {
    pub fn from_gens(gens: &[u32]) -> Self {
        assert!(gens.len() <= 4, "label holds at most 4 generators");
        let mut g = [EMPTY; 4];
        g[..gens.len()].copy_from_slice(gens);
        g[..gens.len()].sort_unstable();
        Label {
            gens: g,
            len: gens.len() as u8,
            sides: 0,
        }
    }

    pub fn gens(&self) -> &[u32] {
        &self.gens[..self.len as usize]
    }

    pub fn sides(&self) -> u8 {
        self.sides
    }

    pub fn side_list(&self) -> impl Iterator<Item = usize> + '_ {
        (0..8).filter(move |s| self.sides & (1 << s) != 0)
    }

    pub fn n_sides(&self) -> usize {
        self.sides.count_ones() as usize
    }

    pub fn on_clip_boundary(&self) -> bool {
        self.sides != 0
    }

    pub fn with_side(mut self, side: usize) -> Self {
        self.sides |= 1 << side;
        self
    }

    pub fn with_sides(mut self, sides: u8) -> Self {
        self.sides |= sides;
        self
    }

    pub fn with_gen(self, g: u32) -> Self {
        if self.contains_gen(g) {
            return self;
        }
        let n = self.len as usize;
        assert!(n < 4, "label holds at most 4 generators");
        let mut out = self;
        out.gens[n] = g;
        out.gens[..=n].sort_unstable();
        out.len += 1;
        out
    }

    pub fn contains_gen(&self, g: u32) -> bool {
        self.gens().contains(&g)
    }

    pub fn intersect(&self, other: &Label) -> Label {
        let mut g = [EMPTY; 4];
        let mut n = 0;
        for &x in self.gens() {
            if other.contains_gen(x) {
                g[n] = x;
                n += 1;
            }
        }
        Label {
            gens: g,
            len: n as u8,
            sides: self.sides & other.sides,
        }
    }

    /// Number of independent linear equations the label imposes.
    pub fn codim(&self) -> usize {
        (self.len as usize).saturating_sub(1) + self.n_sides()
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.gens())?;
        if self.sides != 0 {
            write!(f, "|s{:?}", self.side_list().collect::<Vec<_>>())?;
        }
        Ok(())
    }
}

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Label", 2)?;
        st.serialize_field("generators", self.gens())?;
        st.serialize_field("sides", &self.side_list().collect::<Vec<_>>())?;
        st.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_are_canonical() {
        assert_eq!(Label::from_gens(&[3, 1, 2]), Label::from_gens(&[1, 2, 3]));
        let a = Label::from_gens(&[1, 2, 3]);
        let b = Label::from_gens(&[2, 3, 4]).with_side(1);
        assert_eq!(a.intersect(&b), Label::from_gens(&[2, 3]));
        assert_eq!(Label::from_gens(&[2]).with_gen(0).gens(), &[0, 2]);
        assert_eq!(Label::from_gens(&[2, 5]).with_side(3).codim(), 2);
    }
}
