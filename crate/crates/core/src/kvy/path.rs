use std::fmt;

use super::KvyError;

/// Largest number of tokens a path may have to fit in one 64-bit payload.
pub const MAX_PATH_TOKENS: usize = 32;

/// An address set in a binary application tree: the positions a V
/// combinator inserts its last argument at.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Multipath {
    End,
    Left(Box<Multipath>),
    Right(Box<Multipath>),
    Fork(Box<Multipath>, Box<Multipath>),
}

impl Multipath {
    pub fn left(p: Multipath) -> Multipath {
        Multipath::Left(Box::new(p))
    }

    pub fn right(p: Multipath) -> Multipath {
        Multipath::Right(Box::new(p))
    }

    pub fn fork(l: Multipath, r: Multipath) -> Multipath {
        Multipath::Fork(Box::new(l), Box::new(r))
    }

    /// Number of `Left` and `Right` steps: the number of arguments a V
    /// combinator takes before the inserted one.
    pub fn degree(&self) -> usize {
        match self {
            Multipath::End => 0,
            Multipath::Left(p) | Multipath::Right(p) => 1 + p.degree(),
            Multipath::Fork(l, r) => l.degree() + r.degree(),
        }
    }

    /// Arity of `V` indexed by this path.
    pub fn arity(&self) -> usize {
        self.degree() + 1
    }

    /// Number of tokens in the serialized form.
    pub fn token_count(&self) -> usize {
        match self {
            Multipath::End => 1,
            Multipath::Left(p) | Multipath::Right(p) => 1 + p.token_count(),
            Multipath::Fork(l, r) => 1 + l.token_count() + r.token_count(),
        }
    }

    /// Number of `End` leaves: how many copies of the inserted argument the
    /// result holds.
    pub fn ends(&self) -> usize {
        match self {
            Multipath::End => 1,
            Multipath::Left(p) | Multipath::Right(p) => p.ends(),
            Multipath::Fork(l, r) => l.ends() + r.ends(),
        }
    }
}

/// Assembler syntax: `<`, `>`, `{l,r}`; the empty path prints nothing.
impl fmt::Display for Multipath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Multipath::End => Ok(()),
            Multipath::Left(p) => write!(f, "<{p}"),
            Multipath::Right(p) => write!(f, ">{p}"),
            Multipath::Fork(l, r) => write!(f, "{{{l},{r}}}"),
        }
    }
}

const END: u64 = 0b00;
const LEFT: u64 = 0b01;
const RIGHT: u64 = 0b10;
const FORK: u64 = 0b11;

/// Packs a path into a word, two bits per token in preorder, first token in
/// the least significant bits.
pub fn encode_path_bits(p: &Multipath) -> Result<u64, KvyError> {
    let tokens = p.token_count();
    if tokens > MAX_PATH_TOKENS {
        return Err(KvyError::PathTooLarge { tokens });
    }
    let mut word = 0u64;
    let mut shift = 0;
    let mut stack = vec![p];
    while let Some(p) = stack.pop() {
        let tag = match p {
            Multipath::End => END,
            Multipath::Left(q) => {
                stack.push(q);
                LEFT
            }
            Multipath::Right(q) => {
                stack.push(q);
                RIGHT
            }
            Multipath::Fork(l, r) => {
                stack.push(r);
                stack.push(l);
                FORK
            }
        };
        word |= tag << shift;
        shift += 2;
    }
    Ok(word)
}

/// Inverse of [`encode_path_bits`]. Bits after the last token must be zero.
pub fn decode_path_bits(word: u64) -> Result<Multipath, KvyError> {
    let mut pos = 0;
    let p = decode_at(word, &mut pos)?;
    if pos < MAX_PATH_TOKENS && word >> (2 * pos) != 0 {
        return Err(KvyError::BadPathBits { word });
    }
    Ok(p)
}

fn decode_at(word: u64, pos: &mut usize) -> Result<Multipath, KvyError> {
    if *pos >= MAX_PATH_TOKENS {
        return Err(KvyError::BadPathBits { word });
    }
    let tag = (word >> (2 * *pos)) & 0b11;
    *pos += 1;
    Ok(match tag {
        END => Multipath::End,
        LEFT => Multipath::left(decode_at(word, pos)?),
        RIGHT => Multipath::right(decode_at(word, pos)?),
        _ => {
            let l = decode_at(word, pos)?;
            let r = decode_at(word, pos)?;
            Multipath::fork(l, r)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degrees() {
        let lrl = Multipath::left(Multipath::right(Multipath::left(Multipath::End)));
        assert_eq!(lrl.degree(), 3);
        assert_eq!(Multipath::End.degree(), 0);
        let nested = Multipath::fork(
            Multipath::fork(
                Multipath::left(Multipath::End),
                Multipath::right(Multipath::End),
            ),
            Multipath::left(Multipath::End),
        );
        assert_eq!(nested.degree(), 3);
        assert_eq!(nested.to_string(), "{{<,>},<}");
    }

    #[test]
    fn bit_encoding() {
        assert_eq!(encode_path_bits(&Multipath::End).unwrap(), 0);
        assert_eq!(
            encode_path_bits(&Multipath::left(Multipath::End)).unwrap(),
            0b0001
        );
        let fork = Multipath::fork(Multipath::right(Multipath::End), Multipath::End);
        // Fork, Right, End, End
        assert_eq!(encode_path_bits(&fork).unwrap(), 0b00_00_10_11);
        assert_eq!(decode_path_bits(0b00_00_10_11).unwrap(), fork);
    }

    #[test]
    fn oversized_path_rejected() {
        let mut p = Multipath::End;
        for _ in 0..32 {
            p = Multipath::left(p);
        }
        assert_eq!(
            encode_path_bits(&p),
            Err(KvyError::PathTooLarge { tokens: 33 })
        );
    }

    #[test]
    fn malformed_words_rejected() {
        assert!(decode_path_bits(u64::MAX).is_err());
        // End followed by stray bits.
        assert!(decode_path_bits(0b0100).is_err());
    }
}
