//! Binary cell images: the loadable form of combinator code.
//!
//! A cell is 128 bits: a 64-bit content word, then 16-bit flags, a 16-bit
//! reference count stored with a bias of 16, a 16-bit checker arity and 16
//! reserved bits. A node's content holds the left child index in its low
//! 32 bits and the right child index in its high 32 bits; a leaf's content
//! holds its payload.

use std::collections::HashMap;

use super::path::{decode_path_bits, encode_path_bits};
use super::{KvyError, KvyTerm};
use crate::prim::{op_arity, PROBE_BASE};

pub const FLAG_ALIVE: u16 = 1 << 0;
pub const FLAG_IS_NODE: u16 = 1 << 1;
pub const FLAG_HNF: u16 = 1 << 2;
pub const FLAG_NF: u16 = 1 << 3;
const KIND_SHIFT: u16 = 8;
const KIND_MASK: u16 = 0xF << KIND_SHIFT;
const KNOWN_FLAGS: u16 = FLAG_ALIVE | FLAG_IS_NODE | FLAG_HNF | FLAG_NF | KIND_MASK;

/// Checker arity not yet computed.
pub const ARITY_UNKNOWN: u16 = 0xFFFF;
/// Checker arity of a node whose head can never reduce.
pub const ARITY_STUCK: u16 = 0xFFFE;
/// Stored reference counts are the true count plus this bias.
pub const REFCOUNT_BIAS: u16 = 16;

pub const IMAGE_MAGIC: [u8; 4] = *b"MTRM";
pub const IMAGE_VERSION: u8 = 1;
const HEADER_LEN: usize = 16;
const CELL_LEN: usize = 16;

/// Leaves referenced more often than this get a fresh copy, keeping stored
/// counts far from the 16-bit limit.
const SHARE_LIMIT: u16 = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LeafKind {
    K = 0,
    Y = 1,
    V = 2,
    PrimOp = 3,
    PrimInt = 4,
}

impl LeafKind {
    pub fn from_bits(bits: u16) -> Option<LeafKind> {
        Some(match bits {
            0 => LeafKind::K,
            1 => LeafKind::Y,
            2 => LeafKind::V,
            3 => LeafKind::PrimOp,
            4 => LeafKind::PrimInt,
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Cell {
    pub content: u64,
    pub flags: u16,
    /// Reference count plus [`REFCOUNT_BIAS`].
    pub refcount: u16,
    pub arity: u16,
    pub reserved: u16,
}

impl Cell {
    pub fn node(left: u32, right: u32) -> Cell {
        Cell {
            content: u64::from(left) | (u64::from(right) << 32),
            flags: FLAG_ALIVE | FLAG_IS_NODE,
            refcount: REFCOUNT_BIAS,
            arity: ARITY_UNKNOWN,
            reserved: 0,
        }
    }

    pub fn leaf(kind: LeafKind, payload: u64) -> Cell {
        Cell {
            content: payload,
            flags: FLAG_ALIVE | ((kind as u16) << KIND_SHIFT),
            refcount: REFCOUNT_BIAS,
            arity: ARITY_UNKNOWN,
            reserved: 0,
        }
    }

    pub fn is_node(&self) -> bool {
        self.flags & FLAG_IS_NODE != 0
    }

    pub fn is_alive(&self) -> bool {
        self.flags & FLAG_ALIVE != 0
    }

    pub fn left(&self) -> u32 {
        self.content as u32
    }

    pub fn right(&self) -> u32 {
        (self.content >> 32) as u32
    }

    pub fn kind(&self) -> Option<LeafKind> {
        if self.is_node() {
            None
        } else {
            LeafKind::from_bits((self.flags & KIND_MASK) >> KIND_SHIFT)
        }
    }

    pub fn with_kind(mut self, kind: LeafKind) -> Cell {
        self.flags = (self.flags & !KIND_MASK) | ((kind as u16) << KIND_SHIFT);
        self
    }

    /// Arity of a leaf as a head: `None` for integers and probes.
    pub fn leaf_arity(&self) -> Option<u16> {
        match self.kind()? {
            LeafKind::K | LeafKind::Y => Some(2),
            LeafKind::V => decode_path_bits(self.content)
                .ok()
                .map(|p| p.arity() as u16),
            LeafKind::PrimOp => op_arity(self.content as u32).map(|a| a as u16),
            LeafKind::PrimInt => None,
        }
    }

    pub fn to_bits(self) -> u128 {
        u128::from(self.content)
            | (u128::from(self.flags) << 64)
            | (u128::from(self.refcount) << 80)
            | (u128::from(self.arity) << 96)
            | (u128::from(self.reserved) << 112)
    }

    pub fn from_bits(bits: u128) -> Cell {
        Cell {
            content: bits as u64,
            flags: (bits >> 64) as u16,
            refcount: (bits >> 80) as u16,
            arity: (bits >> 96) as u16,
            reserved: (bits >> 112) as u16,
        }
    }

    /// The leaf as a combinator term, if it is a valid leaf.
    pub fn leaf_term(&self) -> Result<KvyTerm, KvyError> {
        Ok(match self.kind() {
            Some(LeafKind::K) => KvyTerm::K,
            Some(LeafKind::Y) => KvyTerm::Y,
            Some(LeafKind::V) => KvyTerm::V(decode_path_bits(self.content)?),
            Some(LeafKind::PrimOp) => KvyTerm::Prim(self.content as u32),
            Some(LeafKind::PrimInt) => KvyTerm::Int(self.content as i64),
            None => return Err(KvyError::BadImage("not a leaf".into())),
        })
    }
}

/// Leaf cell for an atom; `None` for applications.
pub fn leaf_cell(t: &KvyTerm) -> Result<Option<Cell>, KvyError> {
    Ok(Some(match t {
        KvyTerm::K => Cell::leaf(LeafKind::K, 0),
        KvyTerm::Y => Cell::leaf(LeafKind::Y, 0),
        KvyTerm::V(p) => Cell::leaf(LeafKind::V, encode_path_bits(p)?),
        KvyTerm::Prim(id) => Cell::leaf(LeafKind::PrimOp, u64::from(*id)),
        KvyTerm::Int(n) => Cell::leaf(LeafKind::PrimInt, *n as u64),
        KvyTerm::App(..) => return Ok(None),
    }))
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CellImage {
    pub cells: Vec<Cell>,
    pub root: u32,
}

/// Lays a term out as cells in preorder, root first. Equal leaf atoms
/// share one cell; nodes are never shared.
pub fn emit_image(t: &KvyTerm) -> Result<CellImage, KvyError> {
    let mut cells: Vec<Cell> = Vec::new();
    let mut leaves: HashMap<(u16, u64), u32> = HashMap::new();
    // (term, parent node, is left child)
    let mut stack: Vec<(&KvyTerm, Option<(usize, bool)>)> = vec![(t, None)];
    while let Some((t, parent)) = stack.pop() {
        let index = match leaf_cell(t)? {
            Some(cell) => {
                let key = (cell.flags, cell.content);
                match leaves.get(&key) {
                    Some(&i) if cells[i as usize].refcount < REFCOUNT_BIAS + SHARE_LIMIT => i,
                    _ => {
                        let i = push(&mut cells, cell)?;
                        leaves.insert(key, i);
                        i
                    }
                }
            }
            None => {
                let KvyTerm::App(f, a) = t else {
                    unreachable!()
                };
                let i = push(&mut cells, Cell::node(0, 0))?;
                stack.push((a, Some((i as usize, false))));
                stack.push((f, Some((i as usize, true))));
                i
            }
        };
        cells[index as usize].refcount += 1;
        if let Some((p, is_left)) = parent {
            let c = &mut cells[p];
            let (l, r) = (c.left(), c.right());
            *c = Cell {
                content: if is_left {
                    Cell::node(index, r)
                } else {
                    Cell::node(l, index)
                }
                .content,
                ..*c
            };
        }
    }
    Ok(CellImage { cells, root: 0 })
}

fn push(cells: &mut Vec<Cell>, c: Cell) -> Result<u32, KvyError> {
    let i = cells.len();
    if i >= u32::MAX as usize {
        return Err(KvyError::ImageTooLarge { cells: i + 1 });
    }
    cells.push(c);
    Ok(i as u32)
}

/// Rebuilds the term an image denotes, unfolding shared cells.
pub fn image_to_term(img: &CellImage) -> Result<KvyTerm, KvyError> {
    cells_to_term(&|i| img.cells.get(i as usize).copied(), img.root)
}

/// Rebuilds the term rooted at `root` from any cell store.
pub fn cells_to_term(get: &dyn Fn(u32) -> Option<Cell>, root: u32) -> Result<KvyTerm, KvyError> {
    let cell =
        get(root).ok_or_else(|| KvyError::BadImage(format!("cell index {root} out of range")))?;
    if cell.is_node() {
        let l = cells_to_term(get, cell.left())?;
        let r = cells_to_term(get, cell.right())?;
        Ok(KvyTerm::app(l, r))
    } else {
        cell.leaf_term()
    }
}

pub fn serialize_image(img: &CellImage) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + CELL_LEN * img.cells.len());
    out.extend_from_slice(&IMAGE_MAGIC);
    out.push(IMAGE_VERSION);
    out.extend_from_slice(&[0; 3]);
    out.extend_from_slice(&img.root.to_le_bytes());
    out.extend_from_slice(&(img.cells.len() as u32).to_le_bytes());
    for c in &img.cells {
        out.extend_from_slice(&c.to_bits().to_le_bytes());
    }
    out
}

pub fn load_image(bytes: &[u8]) -> Result<CellImage, KvyError> {
    let bad = |m: &str| KvyError::BadImage(m.to_string());
    if bytes.len() < HEADER_LEN {
        return Err(bad("truncated header"));
    }
    if bytes[0..4] != IMAGE_MAGIC {
        return Err(bad("missing MTRM magic"));
    }
    if bytes[4] != IMAGE_VERSION {
        return Err(KvyError::BadImage(format!(
            "unsupported version {}",
            bytes[4]
        )));
    }
    if bytes[5..8] != [0, 0, 0] {
        return Err(bad("reserved header bytes are not zero"));
    }
    let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().expect("four bytes"));
    let root = word(8);
    let count = word(12) as usize;
    if bytes.len() != HEADER_LEN + CELL_LEN * count {
        return Err(KvyError::BadImage(format!(
            "expected {count} cells, found {} bytes",
            bytes.len() - HEADER_LEN
        )));
    }
    if root as usize >= count {
        return Err(bad("root index out of range"));
    }
    let cells: Vec<Cell> = bytes[HEADER_LEN..]
        .chunks_exact(CELL_LEN)
        .map(|c| Cell::from_bits(u128::from_le_bytes(c.try_into().expect("sixteen bytes"))))
        .collect();
    for (i, c) in cells.iter().enumerate() {
        if c.flags & !KNOWN_FLAGS != 0 {
            return Err(KvyError::BadImage(format!(
                "cell {i}: unsupported flag bits {:#06x}",
                c.flags
            )));
        }
        if !c.is_alive() {
            continue;
        }
        if c.is_node() {
            if c.left() as usize >= count || c.right() as usize >= count {
                return Err(KvyError::BadImage(format!(
                    "cell {i}: child index out of range"
                )));
            }
            continue;
        }
        match c.kind() {
            None => return Err(KvyError::BadImage(format!("cell {i}: unknown leaf kind"))),
            Some(LeafKind::V) => {
                decode_path_bits(c.content)?;
            }
            Some(LeafKind::PrimOp) => {
                let id = c.content;
                if id > u64::from(u32::MAX)
                    || (op_arity(id as u32).is_none() && (id as u32) < PROBE_BASE)
                {
                    return Err(KvyError::BadImage(format!(
                        "cell {i}: unknown operation {id}"
                    )));
                }
            }
            _ => {}
        }
    }
    Ok(CellImage { cells, root })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_leaf() {
        let img = emit_image(&KvyTerm::K).unwrap();
        assert_eq!(img.cells.len(), 1);
        assert_eq!(img.root, 0);
        assert_eq!(img.cells[0].refcount, 17);
        assert_eq!(img.cells[0].arity, ARITY_UNKNOWN);
    }

    #[test]
    fn shared_leaf() {
        let img = emit_image(&KvyTerm::app(KvyTerm::K, KvyTerm::K)).unwrap();
        assert_eq!(img.cells.len(), 2);
        assert_eq!(img.cells[0].left(), 1);
        assert_eq!(img.cells[0].right(), 1);
        assert_eq!(img.cells[1].refcount, 18);
        assert_eq!(img.cells[0].refcount, 17);
    }

    #[test]
    fn bytes_roundtrip() {
        let t = KvyTerm::apps(KvyTerm::Y, [KvyTerm::Int(-4), KvyTerm::Prim(2)]);
        let img = emit_image(&t).unwrap();
        let bytes = serialize_image(&img);
        assert_eq!(&bytes[0..8], &[0x4D, 0x54, 0x52, 0x4D, 1, 0, 0, 0]);
        let back = load_image(&bytes).unwrap();
        assert_eq!(back, img);
        assert_eq!(serialize_image(&back), bytes);
        assert_eq!(image_to_term(&back).unwrap(), t);
    }

    #[test]
    fn corrupt_images_rejected() {
        let mut bytes =
            serialize_image(&emit_image(&KvyTerm::app(KvyTerm::K, KvyTerm::Y)).unwrap());
        assert!(load_image(&bytes[..20]).is_err());
        bytes[16] = 9; // left child of the root
        assert!(load_image(&bytes).is_err());
    }

    #[test]
    fn cell_is_128_bits() {
        let c = Cell {
            content: u64::MAX,
            flags: 0x1234,
            refcount: 0x5678,
            arity: 0x9abc,
            reserved: 0xdef0,
        };
        assert_eq!(Cell::from_bits(c.to_bits()), c);
        assert_eq!(c.to_bits() >> 112, 0xdef0);
    }
}
