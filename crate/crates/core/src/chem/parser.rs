//! SMILES reader.
//!
//! Accepts the organic subset, bracket atoms (isotope, element, chirality,
//! hydrogen count, charge, atom class), branches, ring closures including
//! `%nn`, dot-disconnected components and lowercase aromatic atoms.
//! Directional bonds and chirality are kept as [`StereoMark`]s only.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use super::element;
use super::molecule::{Atom, Bond, BondOrder, Molecule, StereoMark};
use super::rings;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DiagnosticKind {
    UnbalancedParen,
    UnclosedRing,
    BadElement,
    BadCharge,
    BadRingDigit,
    EmptyInput,
    UnsupportedFeature,
}

/// Why a SMILES string was rejected, and where.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseDiagnostic {
    pub byte_offset: usize,
    pub kind: DiagnosticKind,
    pub message: String,
}

impl ParseDiagnostic {
    fn new(byte_offset: usize, kind: DiagnosticKind, message: impl Into<String>) -> Self {
        Self {
            byte_offset,
            kind,
            message: message.into(),
        }
    }
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} at byte {}: {}", self.kind, self.byte_offset, self.message)
    }
}

impl core::error::Error for ParseDiagnostic {}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum BondSym {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondSym {
    fn order(self) -> BondOrder {
        match self {
            BondSym::Single => BondOrder::Single,
            BondSym::Double => BondOrder::Double,
            BondSym::Triple => BondOrder::Triple,
            BondSym::Aromatic => BondOrder::Aromatic,
        }
    }
}

struct PendingBond {
    a: usize,
    b: usize,
    sym: Option<BondSym>,
    offset: usize,
}

struct RingOpen {
    atom: usize,
    sym: Option<BondSym>,
    offset: usize,
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    atoms: Vec<Atom>,
    atom_offsets: Vec<usize>,
    bonds: Vec<PendingBond>,
    stereo: Vec<StereoMark>,
    rings: BTreeMap<u16, RingOpen>,
}

type PResult<T> = Result<T, ParseDiagnostic>;

/// Parses a SMILES string into a molecular graph.
pub fn parse_smiles(text: &str) -> Result<Molecule, ParseDiagnostic> {
    if text.is_empty() {
        return Err(ParseDiagnostic::new(0, DiagnosticKind::EmptyInput, "empty SMILES"));
    }
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        atoms: Vec::new(),
        atom_offsets: Vec::new(),
        bonds: Vec::new(),
        stereo: Vec::new(),
        rings: BTreeMap::new(),
    };
    p.run()?;
    p.finish()
}

impl Parser<'_> {
    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn err<T>(&self, offset: usize, kind: DiagnosticKind, msg: impl Into<String>) -> PResult<T> {
        Err(ParseDiagnostic::new(offset, kind, msg))
    }

    fn run(&mut self) -> PResult<()> {
        let mut prev: Option<usize> = None;
        let mut branches: Vec<(usize, usize)> = Vec::new();
        let mut pending: Option<(BondSym, usize)> = None;
        let mut just_opened = false;

        while let Some(c) = self.peek() {
            let at = self.pos;
            match c {
                b'(' => {
                    let Some(p) = prev else {
                        return self.err(at, DiagnosticKind::UnbalancedParen, "branch without a preceding atom");
                    };
                    if just_opened {
                        return self.err(
                            at,
                            DiagnosticKind::UnbalancedParen,
                            "branch opened directly inside a branch",
                        );
                    }
                    if let Some((_, off)) = pending {
                        return self.err(off, DiagnosticKind::BadElement, "bond symbol before branch");
                    }
                    branches.push((p, at));
                    just_opened = true;
                    self.pos += 1;
                }
                b')' => {
                    let Some((p, _)) = branches.pop() else {
                        return self.err(at, DiagnosticKind::UnbalancedParen, "')' without matching '('");
                    };
                    if just_opened {
                        return self.err(at, DiagnosticKind::UnbalancedParen, "empty branch");
                    }
                    if let Some((_, off)) = pending {
                        return self.err(off, DiagnosticKind::BadElement, "bond symbol not followed by an atom");
                    }
                    prev = Some(p);
                    self.pos += 1;
                }
                b'-' | b'=' | b'#' | b':' | b'/' | b'\\' | b'$' => {
                    if prev.is_none() || pending.is_some() {
                        return self.err(at, DiagnosticKind::BadElement, "unexpected bond symbol");
                    }
                    let sym = match c {
                        b'-' => BondSym::Single,
                        b'=' => BondSym::Double,
                        b'#' => BondSym::Triple,
                        b':' => BondSym::Aromatic,
                        b'$' => {
                            return self.err(
                                at,
                                DiagnosticKind::UnsupportedFeature,
                                "quadruple bonds are not supported",
                            );
                        }
                        _ => {
                            self.stereo.push(StereoMark::Directional(at));
                            BondSym::Single
                        }
                    };
                    pending = Some((sym, at));
                    self.pos += 1;
                }
                b'.' => {
                    if prev.is_none() || pending.is_some() || just_opened {
                        return self.err(at, DiagnosticKind::BadElement, "unexpected '.'");
                    }
                    prev = None;
                    self.pos += 1;
                }
                b'0'..=b'9' | b'%' => {
                    let Some(p) = prev else {
                        return self.err(
                            at,
                            DiagnosticKind::BadRingDigit,
                            "ring closure without a preceding atom",
                        );
                    };
                    if just_opened {
                        return self.err(at, DiagnosticKind::BadRingDigit, "ring closure at start of branch");
                    }
                    let num = self.ring_number()?;
                    self.ring_bond(p, num, pending.take(), at)?;
                }
                b'[' => {
                    let idx = self.bracket_atom()?;
                    self.link(prev, idx, pending.take(), at);
                    prev = Some(idx);
                    just_opened = false;
                }
                b'*' => {
                    return self.err(
                        at,
                        DiagnosticKind::UnsupportedFeature,
                        "wildcard atoms are not supported",
                    );
                }
                _ => {
                    let idx = self.organic_atom()?;
                    self.link(prev, idx, pending.take(), at);
                    prev = Some(idx);
                    just_opened = false;
                }
            }
        }
        if let Some((_, off)) = pending {
            return self.err(off, DiagnosticKind::BadElement, "bond symbol not followed by an atom");
        }
        if let Some(&(_, off)) = branches.last() {
            return self.err(off, DiagnosticKind::UnbalancedParen, "unclosed branch");
        }
        if let Some(open) = self.rings.values().min_by_key(|r| r.offset) {
            return self.err(open.offset, DiagnosticKind::UnclosedRing, "ring bond never closed");
        }
        if self.atoms.is_empty() {
            return self.err(0, DiagnosticKind::EmptyInput, "no atoms");
        }
        Ok(())
    }

    fn link(&mut self, prev: Option<usize>, idx: usize, pending: Option<(BondSym, usize)>, at: usize) {
        if let Some(p) = prev {
            let (sym, offset) = match pending {
                Some((s, off)) => (Some(s), off),
                None => (None, at),
            };
            self.bonds.push(PendingBond {
                a: p,
                b: idx,
                sym,
                offset,
            });
        }
    }

    fn ring_number(&mut self) -> PResult<u16> {
        let at = self.pos;
        let c = self.src[self.pos];
        if c == b'%' {
            let d1 = self.src.get(at + 1).copied();
            let d2 = self.src.get(at + 2).copied();
            match (d1, d2) {
                (Some(a @ b'0'..=b'9'), Some(b @ b'0'..=b'9')) => {
                    self.pos += 3;
                    Ok(u16::from(a - b'0') * 10 + u16::from(b - b'0'))
                }
                _ => self.err(at, DiagnosticKind::BadRingDigit, "'%' must be followed by two digits"),
            }
        } else {
            self.pos += 1;
            Ok(u16::from(c - b'0'))
        }
    }

    fn ring_bond(&mut self, atom: usize, num: u16, pending: Option<(BondSym, usize)>, at: usize) -> PResult<()> {
        let sym = pending.map(|(s, _)| s);
        match self.rings.remove(&num) {
            None => {
                self.rings.insert(num, RingOpen { atom, sym, offset: at });
                Ok(())
            }
            Some(open) => {
                if open.atom == atom {
                    return self.err(at, DiagnosticKind::BadRingDigit, "ring closure onto the same atom");
                }
                let duplicate = self
                    .bonds
                    .iter()
                    .any(|b| (b.a == atom && b.b == open.atom) || (b.a == open.atom && b.b == atom));
                if duplicate {
                    return self.err(
                        at,
                        DiagnosticKind::BadRingDigit,
                        "ring closure duplicates an existing bond",
                    );
                }
                let sym = match (open.sym, sym) {
                    (Some(a), Some(b)) if a != b => {
                        return self.err(
                            at,
                            DiagnosticKind::BadRingDigit,
                            "conflicting ring-closure bond symbols",
                        );
                    }
                    (a, b) => a.or(b),
                };
                self.bonds.push(PendingBond {
                    a: open.atom,
                    b: atom,
                    sym,
                    offset: at,
                });
                Ok(())
            }
        }
    }

    fn push_atom(&mut self, atom: Atom, offset: usize) -> usize {
        self.atoms.push(atom);
        self.atom_offsets.push(offset);
        self.atoms.len() - 1
    }

    fn organic_atom(&mut self) -> PResult<usize> {
        let at = self.pos;
        let c = self.src[at];
        let next = self.src.get(at + 1).copied();
        let (z, aromatic, len) = match (c, next) {
            (b'C', Some(b'l')) => (17, false, 2),
            (b'B', Some(b'r')) => (35, false, 2),
            (b'B', _) => (5, false, 1),
            (b'C', _) => (6, false, 1),
            (b'N', _) => (7, false, 1),
            (b'O', _) => (8, false, 1),
            (b'P', _) => (15, false, 1),
            (b'S', _) => (16, false, 1),
            (b'F', _) => (9, false, 1),
            (b'I', _) => (53, false, 1),
            (b'b', _) => (5, true, 1),
            (b'c', _) => (6, true, 1),
            (b'n', _) => (7, true, 1),
            (b'o', _) => (8, true, 1),
            (b'p', _) => (15, true, 1),
            (b's', _) => (16, true, 1),
            _ => {
                let shown = core::str::from_utf8(&self.src[at..])
                    .ok()
                    .and_then(|s| s.chars().next())
                    .map_or_else(|| "?".to_string(), |ch| ch.to_string());
                return self.err(
                    at,
                    DiagnosticKind::BadElement,
                    format!("unexpected character '{shown}'"),
                );
            }
        };
        self.pos += len;
        Ok(self.push_atom(Atom::new(z).aromatic(aromatic), at))
    }

    fn digits(&mut self) -> Option<u32> {
        let start = self.pos;
        let mut v: u32 = 0;
        while let Some(d @ b'0'..=b'9') = self.peek() {
            v = v.saturating_mul(10).saturating_add(u32::from(d - b'0'));
            self.pos += 1;
        }
        (self.pos > start).then_some(v)
    }

    fn bracket_atom(&mut self) -> PResult<usize> {
        let open = self.pos;
        self.pos += 1;
        let isotope = match self.digits() {
            Some(v) if v > u32::from(u16::MAX) => {
                return self.err(open + 1, DiagnosticKind::BadElement, "isotope out of range");
            }
            Some(v) => Some(v as u16),
            None => None,
        };

        let (z, aromatic) = self.bracket_symbol()?;

        // chirality
        if self.peek() == Some(b'@') {
            self.stereo.push(StereoMark::Chirality(self.pos));
            self.pos += 1;
            if self.peek() == Some(b'@') {
                self.pos += 1;
            } else if let (Some(a), Some(b)) = (self.peek(), self.src.get(self.pos + 1).copied()) {
                if matches!(
                    (a, b),
                    (b'T', b'H') | (b'A', b'L') | (b'S', b'P') | (b'T', b'B') | (b'O', b'H')
                ) {
                    self.pos += 2;
                    self.digits();
                }
            }
        }

        let mut hcount = 0u8;
        if self.peek() == Some(b'H') {
            self.pos += 1;
            hcount = match self.digits() {
                Some(v) if v > 9 => {
                    return self.err(self.pos - 1, DiagnosticKind::BadElement, "hydrogen count too large");
                }
                Some(v) => v as u8,
                None => 1,
            };
        }

        let mut charge: i32 = 0;
        if let Some(sign @ (b'+' | b'-')) = self.peek() {
            let charge_at = self.pos;
            let unit = if sign == b'+' { 1 } else { -1 };
            self.pos += 1;
            if let Some(v) = self.digits() {
                charge = unit * v.min(1000) as i32;
            } else {
                charge = unit;
                while self.peek() == Some(sign) {
                    charge += unit;
                    self.pos += 1;
                }
            }
            if !(-4..=4).contains(&charge) {
                return self.err(
                    charge_at,
                    DiagnosticKind::BadCharge,
                    format!("charge {charge} outside -4..=4"),
                );
            }
        }

        if self.peek() == Some(b':') {
            self.pos += 1;
            if self.digits().is_none() {
                return self.err(self.pos, DiagnosticKind::BadElement, "atom class needs digits");
            }
        }

        match self.peek() {
            Some(b']') => self.pos += 1,
            Some(b'+' | b'-') => {
                return self.err(self.pos, DiagnosticKind::BadCharge, "malformed charge");
            }
            Some(_) => {
                return self.err(
                    self.pos,
                    DiagnosticKind::BadElement,
                    "unexpected character in bracket atom",
                );
            }
            None => return self.err(open, DiagnosticKind::BadElement, "unterminated bracket atom"),
        }

        let mut atom = Atom::new(z).aromatic(aromatic);
        atom.isotope = isotope;
        atom.formal_charge = charge as i8;
        atom.explicit_h = Some(hcount);
        Ok(self.push_atom(atom, open))
    }

    fn bracket_symbol(&mut self) -> PResult<(u8, bool)> {
        let at = self.pos;
        let Some(c) = self.peek() else {
            return self.err(at, DiagnosticKind::BadElement, "missing element symbol");
        };
        if c == b'*' {
            return self.err(
                at,
                DiagnosticKind::UnsupportedFeature,
                "wildcard atoms are not supported",
            );
        }
        let next = self.src.get(at + 1).copied();
        if c.is_ascii_uppercase() {
            if let Some(l @ b'a'..=b'z') = next {
                let two = [c, l];
                if let Some(z) = core::str::from_utf8(&two).ok().and_then(element::lookup) {
                    self.pos += 2;
                    return Ok((z, false));
                }
            }
            let one = [c];
            if let Some(z) = core::str::from_utf8(&one).ok().and_then(element::lookup) {
                self.pos += 1;
                return Ok((z, false));
            }
        } else if c.is_ascii_lowercase() {
            if let Some(l @ b'a'..=b'z') = next {
                let two = [c.to_ascii_uppercase(), l];
                if let Some(z) = core::str::from_utf8(&two).ok().and_then(element::lookup) {
                    if element::is_bracket_aromatic(z) {
                        self.pos += 2;
                        return Ok((z, true));
                    }
                }
            }
            let one = [c.to_ascii_uppercase()];
            if let Some(z) = core::str::from_utf8(&one).ok().and_then(element::lookup) {
                if element::is_bracket_aromatic(z) {
                    self.pos += 1;
                    return Ok((z, true));
                }
            }
        }
        self.err(at, DiagnosticKind::BadElement, "unknown element symbol")
    }

    fn finish(self) -> PResult<Molecule> {
        let mut bonds = Vec::with_capacity(self.bonds.len());
        for pb in &self.bonds {
            let both = self.atoms[pb.a].aromatic && self.atoms[pb.b].aromatic;
            let order = match pb.sym {
                Some(BondSym::Aromatic) if !both => {
                    return Err(ParseDiagnostic::new(
                        pb.offset,
                        DiagnosticKind::UnsupportedFeature,
                        "aromatic bond between non-aromatic atoms",
                    ));
                }
                Some(s) => s.order(),
                None if both => BondOrder::Aromatic,
                None => BondOrder::Single,
            };
            bonds.push(Bond::new(pb.a, pb.b, order));
        }

        // Unmarked bonds between aromatic atoms that are not on a ring become single.
        let probe = Molecule::with_hydrogens(self.atoms.clone(), bonds.clone(), alloc::vec![0; self.atoms.len()])
            .map_err(|e| ParseDiagnostic::new(0, DiagnosticKind::UnsupportedFeature, e.to_string()))?;
        let ring_bond = rings::ring_bonds(&probe);
        for (k, pb) in self.bonds.iter().enumerate() {
            if bonds[k].order == BondOrder::Aromatic && !ring_bond[k] {
                if pb.sym.is_some() {
                    return Err(ParseDiagnostic::new(
                        pb.offset,
                        DiagnosticKind::UnsupportedFeature,
                        "explicit aromatic bond outside a ring",
                    ));
                }
                bonds[k].order = BondOrder::Single;
            }
        }
        let ring_atom = rings::ring_atoms(&probe, &ring_bond);
        for (i, atom) in self.atoms.iter().enumerate() {
            if atom.aromatic && !ring_atom[i] {
                return Err(ParseDiagnostic::new(
                    self.atom_offsets[i],
                    DiagnosticKind::UnsupportedFeature,
                    "aromatic atom outside a ring",
                ));
            }
        }

        let mut m = Molecule::new(self.atoms, bonds)
            .map_err(|e| ParseDiagnostic::new(0, DiagnosticKind::UnsupportedFeature, e.to_string()))?;
        m.set_stereo(self.stereo);
        Ok(m)
    }
}
