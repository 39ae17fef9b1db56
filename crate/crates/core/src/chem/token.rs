//! Action vocabulary of the generator.

use std::fmt;

use super::ParseError;

/// Index into the [`Vocabulary`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Token(pub u8);

impl Token {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

const GLYPHS: [char; 15] = [
    '^', '$', 'C', 'N', 'O', 'S', 'F', '=', '#', '(', ')', '1', '2', '3', '4',
];

/// The fixed token alphabet: framing tokens, five elements, two bond
/// prefixes, branch delimiters and ring-closure digits `1`-`4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Vocabulary;

impl Vocabulary {
    pub const START: Token = Token(0);
    pub const STOP: Token = Token(1);

    pub fn len(&self) -> usize {
        GLYPHS.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn glyph(&self, t: Token) -> char {
        GLYPHS[t.index()]
    }

    pub fn token(&self, glyph: char) -> Option<Token> {
        GLYPHS.iter().position(|&g| g == glyph).map(|i| Token(i as u8))
    }

    pub fn tokens(&self) -> impl Iterator<Item = Token> {
        (0..GLYPHS.len() as u8).map(Token)
    }

    /// Tokenizes a molecule line (no framing glyphs allowed).
    pub fn encode(&self, line: &str) -> Result<Vec<Token>, ParseError> {
        line.chars()
            .enumerate()
            .map(|(pos, c)| match self.token(c) {
                Some(t) if t != Self::START && t != Self::STOP => Ok(t),
                _ => Err(ParseError::UnknownToken { pos, glyph: c }),
            })
            .collect()
    }

    /// Wraps a molecule line in START/STOP.
    pub fn encode_framed(&self, line: &str) -> Result<Vec<Token>, ParseError> {
        let mut out = Vec::with_capacity(line.len() + 2);
        out.push(Self::START);
        out.extend(self.encode(line)?);
        out.push(Self::STOP);
        Ok(out)
    }

    pub fn decode(&self, tokens: &[Token]) -> String {
        tokens.iter().map(|&t| self.glyph(t)).collect()
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", Vocabulary.glyph(*self))
    }
}
