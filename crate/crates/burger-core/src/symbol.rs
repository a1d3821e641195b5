//! The eight-letter alphabet and words over it.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

/// One letter of the alphabet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[repr(u8)]
pub enum Symbol {
    /// hamburger
    HB = 0,
    /// cheeseburger
    CB = 1,
    /// hamburger order
    HO = 2,
    /// cheeseburger order
    CO = 3,
    /// flexible order
    FO = 4,
    /// stale order
    SO = 5,
    /// duplicate burger
    DB = 6,
    /// opposite burger
    EB = 7,
}

/// The two burger types.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kind {
    Ham,
    Cheese,
}

impl Kind {
    pub fn other(self) -> Kind {
        match self {
            Kind::Ham => Kind::Cheese,
            Kind::Cheese => Kind::Ham,
        }
    }

    pub fn burger(self) -> Symbol {
        match self {
            Kind::Ham => Symbol::HB,
            Kind::Cheese => Symbol::CB,
        }
    }

    pub fn order(self) -> Symbol {
        match self {
            Kind::Ham => Symbol::HO,
            Kind::Cheese => Symbol::CO,
        }
    }
}

pub type Word = Vec<Symbol>;

impl Symbol {
    pub const ALL: [Symbol; 8] = [
        Symbol::HB,
        Symbol::CB,
        Symbol::HO,
        Symbol::CO,
        Symbol::FO,
        Symbol::SO,
        Symbol::DB,
        Symbol::EB,
    ];

    /// The identified sub-alphabet.
    pub const PLAIN: [Symbol; 4] = [Symbol::HB, Symbol::CB, Symbol::HO, Symbol::CO];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    #[inline]
    pub fn from_index(i: usize) -> Symbol {
        Symbol::ALL[i]
    }

    #[inline]
    pub fn is_burger(self) -> bool {
        matches!(self, Symbol::HB | Symbol::CB | Symbol::DB | Symbol::EB)
    }

    #[inline]
    pub fn is_order(self) -> bool {
        !self.is_burger()
    }

    /// True on HB, CB, HO, CO.
    #[inline]
    pub fn is_plain(self) -> bool {
        (self as u8) < 4
    }

    /// Burger type of HB/CB/HO/CO; `None` for the special symbols.
    #[inline]
    pub fn kind(self) -> Option<Kind> {
        match self {
            Symbol::HB | Symbol::HO => Some(Kind::Ham),
            Symbol::CB | Symbol::CO => Some(Kind::Cheese),
            _ => None,
        }
    }

    /// Swap hamburger and cheeseburger roles.
    #[inline]
    pub fn dagger(self) -> Symbol {
        match self {
            Symbol::HB => Symbol::CB,
            Symbol::CB => Symbol::HB,
            Symbol::HO => Symbol::CO,
            Symbol::CO => Symbol::HO,
            s => s,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Symbol::HB => 'h',
            Symbol::CB => 'c',
            Symbol::HO => 'H',
            Symbol::CO => 'C',
            Symbol::FO => 'F',
            Symbol::SO => 'S',
            Symbol::DB => 'D',
            Symbol::EB => 'E',
        }
    }

    pub fn from_char(ch: char) -> Option<Symbol> {
        Some(match ch {
            'h' => Symbol::HB,
            'c' => Symbol::CB,
            'H' => Symbol::HO,
            'C' => Symbol::CO,
            'F' => Symbol::FO,
            'S' => Symbol::SO,
            'D' => Symbol::DB,
            'E' => Symbol::EB,
            _ => return None,
        })
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Symbol::HB => "HB",
            Symbol::CB => "CB",
            Symbol::HO => "HO",
            Symbol::CO => "CO",
            Symbol::FO => "FO",
            Symbol::SO => "SO",
            Symbol::DB => "DB",
            Symbol::EB => "EB",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("invalid symbol {ch:?} at byte {pos}")]
pub struct ParseWordError {
    pub ch: char,
    pub pos: usize,
}

/// Parse the one-character-per-symbol encoding; whitespace is skipped.
pub fn parse_word(s: &str) -> Result<Word, ParseWordError> {
    let mut out = Vec::with_capacity(s.len());
    for (pos, ch) in s.char_indices() {
        if ch.is_whitespace() {
            continue;
        }
        match Symbol::from_char(ch) {
            Some(sym) => out.push(sym),
            None => return Err(ParseWordError { ch, pos }),
        }
    }
    Ok(out)
}

pub fn format_word(w: &[Symbol]) -> String {
    w.iter().map(|s| s.to_char()).collect()
}

/// Apply the involution letter by letter.
pub fn dagger(w: &[Symbol]) -> Word {
    w.iter().map(|s| s.dagger()).collect()
}
