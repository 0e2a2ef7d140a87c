//! KVY combinator code: multipaths, abstraction elimination, the textual
//! assembler and the binary cell image.

mod compile;
mod image;
mod path;
mod text;

use thiserror::Error;

pub use compile::{bracket, compile_core, residual};
pub use image::{
    cells_to_term, emit_image, image_to_term, leaf_cell, load_image, serialize_image, Cell,
    CellImage, LeafKind, ARITY_STUCK, ARITY_UNKNOWN, FLAG_ALIVE, FLAG_HNF, FLAG_IS_NODE, FLAG_NF,
    IMAGE_MAGIC, IMAGE_VERSION, REFCOUNT_BIAS,
};
pub use path::{decode_path_bits, encode_path_bits, Multipath, MAX_PATH_TOKENS};
pub use text::{parse_kvy, print_kvy};

use crate::prim::op_arity;

/// A combinator expression: no variables, no lambdas.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum KvyTerm {
    K,
    Y,
    V(Multipath),
    /// Primitive operation or probe, by identifier.
    Prim(u32),
    Int(i64),
    App(Box<KvyTerm>, Box<KvyTerm>),
}

impl KvyTerm {
    pub fn app(f: KvyTerm, a: KvyTerm) -> KvyTerm {
        KvyTerm::App(Box::new(f), Box::new(a))
    }

    pub fn apps(f: KvyTerm, args: impl IntoIterator<Item = KvyTerm>) -> KvyTerm {
        args.into_iter().fold(f, KvyTerm::app)
    }

    /// Number of arguments the atom needs before it reduces; `None` for
    /// applications, integers and probes, which never reduce as a head.
    pub fn arity(&self) -> Option<usize> {
        match self {
            KvyTerm::K | KvyTerm::Y => Some(2),
            KvyTerm::V(p) => Some(p.arity()),
            KvyTerm::Prim(id) => op_arity(*id).map(|a| a as usize),
            KvyTerm::Int(_) | KvyTerm::App(..) => None,
        }
    }

    /// Head atom and arguments of the application spine.
    pub fn spine(&self) -> (&KvyTerm, Vec<&KvyTerm>) {
        let mut args = Vec::new();
        let mut t = self;
        while let KvyTerm::App(f, a) = t {
            args.push(&**a);
            t = f;
        }
        args.reverse();
        (t, args)
    }

    /// Number of nodes and leaves.
    pub fn size(&self) -> usize {
        match self {
            KvyTerm::App(f, a) => 1 + f.size() + a.size(),
            _ => 1,
        }
    }
}

impl std::fmt::Display for KvyTerm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&print_kvy(self))
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum KvyError {
    #[error("variable `{var}` does not occur in the term")]
    VarAbsent { var: String },
    #[error("term is not lambda-free")]
    UnexpectedLambda,
    #[error("free variable `{name}` in a term to be compiled")]
    FreeVariable { name: String },
    #[error(
        "V path of {tokens} tokens exceeds the limit of 32; split the function into smaller ones"
    )]
    PathTooLarge { tokens: usize },
    #[error("word {word:#x} is not a valid path encoding")]
    BadPathBits { word: u64 },
    #[error("{line}:{col}: {message}")]
    Parse {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("image of {cells} cells exceeds the 2^32 cell address space")]
    ImageTooLarge { cells: usize },
    #[error("malformed image: {0}")]
    BadImage(String),
}

/// Compiled Scott booleans, as answered by the comparison primitives:
/// `False = \f1 f2 . f1` and `True = \f1 f2 . f2`.
pub fn scott_bool(b: bool) -> &'static KvyTerm {
    use std::sync::OnceLock;
    static FORMS: OnceLock<[KvyTerm; 2]> = OnceLock::new();
    let forms = FORMS.get_or_init(|| {
        let compile = |i| compile_core(&crate::lower::scott_ctor(i, 2, 0)).expect("closed");
        [compile(0), compile(1)]
    });
    &forms[usize::from(b)]
}
