//! Chain-construction engine over small concrete categories.
//!
//! The engine builds a countable structure as the union of a chain of finite
//! stages and answers questions about that union without ever materialising
//! it. A [`Category`] fixes what the finite objects are, how they are
//! enumerated up to a canonical form, which embeddings between them count as
//! *special*, and how objects are joined or amalgamated. One deterministic
//! schedule then serves every category ([`build_chain`]): stage 1 is the
//! first enumerated object, each even step joins the next enumerated object,
//! and each odd step discharges the next entry of a graded, seeded queue of
//! extension tasks. Stages only ever grow in place, so every connecting map
//! is a literal inclusion and elements keep their identity along the chain —
//! the union is realised concretely by the top stage at any finite time.
//!
//! Queries on a frozen chain are read-only and thread-safe:
//! [`locate`] finds a special embedding of an object into some stage,
//! [`homogeneity_witness`] extends an isomorphism of located subobjects,
//! [`back_and_forth`] pairs two chains of the same category element by
//! element, [`check_axioms`] audits the closure properties a category claims
//! (isomorphism invariance, hereditariness, joint embedding, amalgamation,
//! and the reflexivity/transitivity/interpolation laws of the special
//! embeddings), and [`extension_property_test`] measures how reliably the
//! chain realises one-point extensions of already-embedded configurations.
//!
//! Built-in categories: finite graphs and finite linear orders (all
//! embeddings are special), finitely generated free abelian groups with
//! either pure ("forall") or plain injective embeddings, centralizer towers
//! over a fixed free base (`ice`), towers mixing free-product and
//! centralizer steps over the trivial base (`fpce`), and `limit_plain`, a
//! deliberately broken variant of `fpce` whose amalgamation oracle is
//! obstructed — its tasks fail and stay in the log, which is exactly what
//! the axiom audit reports.

mod audit;
mod chain;
mod finite;
mod queries;
mod towers;

pub use audit::{
    check_axioms, extension_property_test, AxiomCheck, AxiomReport, ExtOutcome, ExtReport,
    ExtTrial,
};
pub use chain::{build_chain, horizon, ChainState, StepAction, StepRecord, TaskStatus};
pub use queries::{
    back_and_forth, homogeneity_witness, limit_elem_eq, locate, push_elem, Location, PartialIso,
};

use crate::error::{Error, Result};
use crate::tower::{Hom, Tower};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A built-in category: object universe plus embedding discipline.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Category {
    /// Finite simple graphs; special embeddings are induced-subgraph maps.
    FinGraph,
    /// Finite linear orders; special embeddings are order-preserving maps.
    FinLinorder,
    /// Finitely generated free abelian groups with pure (direct-factor)
    /// embeddings.
    FreeAbelianForall,
    /// Finitely generated free abelian groups with plain injective
    /// embeddings.
    FreeAbelianPlain,
    /// Centralizer towers over a fixed free base of the given rank; special
    /// embeddings send letters to conjugated letters over the identity on
    /// the base.
    Ice { base_rank: usize },
    /// Towers over the trivial base built from free-product and centralizer
    /// steps; same special embeddings as `Ice`.
    Fpce,
    /// Same objects as `Fpce` but with the plain-embedding amalgamation
    /// discipline, which is obstructed: its amalgamation tasks always fail
    /// and the failure cites the square-span obstruction.
    LimitPlain,
}

impl Category {
    pub fn name(&self) -> &'static str {
        match self {
            Category::FinGraph => "fin_graph",
            Category::FinLinorder => "fin_linorder",
            Category::FreeAbelianForall => "free_abelian_forall",
            Category::FreeAbelianPlain => "free_abelian_plain",
            Category::Ice { .. } => "ice",
            Category::Fpce => "fpce",
            Category::LimitPlain => "limit_plain",
        }
    }

    /// Builds a category from its name plus the optional `base_rank`
    /// parameter (required by `ice`, rejected elsewhere).
    pub fn from_name(name: &str, base_rank: Option<usize>) -> Result<Category> {
        let cat = match name {
            "fin_graph" => Category::FinGraph,
            "fin_linorder" => Category::FinLinorder,
            "free_abelian_forall" => Category::FreeAbelianForall,
            "free_abelian_plain" => Category::FreeAbelianPlain,
            "ice" => {
                let rank = base_rank.unwrap_or(2);
                if rank == 0 {
                    return Err(Error::Input("ice requires base_rank >= 1".into()));
                }
                return Ok(Category::Ice { base_rank: rank });
            }
            "fpce" => Category::Fpce,
            "limit_plain" => Category::LimitPlain,
            other => {
                return Err(Error::Input(format!(
                    "unknown category '{other}' (expected fin_graph, fin_linorder, \
                     free_abelian_forall, free_abelian_plain, ice, fpce or limit_plain)"
                )))
            }
        };
        if base_rank.is_some() {
            return Err(Error::Input(format!(
                "category '{name}' takes no base_rank parameter"
            )));
        }
        Ok(cat)
    }

    /// `index`-th object of the enumeration. Total and deterministic; the
    /// enumeration is canonical-form-stable (every emitted object equals its
    /// own canonical form) but is not claimed injective for the tower
    /// categories.
    pub fn object(&self, index: u64) -> Result<Obj> {
        match self {
            Category::FinGraph => finite::graph_object(index),
            Category::FinLinorder => Ok(finite::order_object(index)),
            Category::FreeAbelianForall | Category::FreeAbelianPlain => Ok(Obj::Abelian {
                rank: usize::try_from(index)
                    .map_err(|_| Error::Input("abelian object index overflows usize".into()))?,
            }),
            Category::Ice { base_rank } => towers::ice_object(*base_rank, index),
            Category::Fpce | Category::LimitPlain => towers::fpce_object(index),
        }
    }

    /// Canonical form of an object: graphs by least edge-set code under
    /// vertex permutation (sizes up to 8), orders by renumbering, abelian
    /// groups by rank, towers by replaying their step descriptors with
    /// standard letter names and the stored retraction cores.
    pub fn canonical(&self, obj: &Obj) -> Result<Obj> {
        self.expect_kind(obj)?;
        match obj {
            Obj::Graph { n, edges } => finite::graph_canonical(*n, edges),
            Obj::Order { points } => Ok(finite::order_object(points.len() as u64)),
            Obj::Abelian { rank } => Ok(Obj::Abelian { rank: *rank }),
            Obj::Tower { tower } => Ok(Obj::Tower {
                tower: towers::canonical_tower(tower)?,
            }),
        }
    }

    /// Index of the object in the enumeration, when it can be recovered.
    /// Exact for graphs, orders and abelian objects; for towers it re-ranks
    /// each step's core in the shortlex order (bounded scan).
    pub fn object_index(&self, obj: &Obj) -> Option<u64> {
        if self.expect_kind(obj).is_err() {
            return None;
        }
        match obj {
            Obj::Graph { n, edges } => finite::graph_index(*n, edges),
            Obj::Order { points } => Some(points.len() as u64),
            Obj::Abelian { rank } => Some(*rank as u64),
            Obj::Tower { tower } => towers::tower_index(self, tower),
        }
    }

    /// Checks that the object variant belongs to this category.
    pub fn expect_kind(&self, obj: &Obj) -> Result<()> {
        let ok = matches!(
            (self, obj),
            (Category::FinGraph, Obj::Graph { .. })
                | (Category::FinLinorder, Obj::Order { .. })
                | (Category::FreeAbelianForall, Obj::Abelian { .. })
                | (Category::FreeAbelianPlain, Obj::Abelian { .. })
                | (Category::Ice { .. }, Obj::Tower { .. })
                | (Category::Fpce, Obj::Tower { .. })
                | (Category::LimitPlain, Obj::Tower { .. })
        );
        if ok {
            Ok(())
        } else {
            Err(Error::Input(format!(
                "object kind does not match category '{}'",
                self.name()
            )))
        }
    }
}

#[derive(Serialize, Deserialize)]
struct CategoryDoc {
    category: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    base_rank: Option<usize>,
}

impl Serialize for Category {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CategoryDoc {
            category: self.name().to_string(),
            base_rank: match self {
                Category::Ice { base_rank } => Some(*base_rank),
                _ => None,
            },
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Category {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Name(String),
            Doc(CategoryDoc),
        }
        let (name, base_rank) = match Repr::deserialize(d)? {
            Repr::Name(n) => (n, None),
            Repr::Doc(doc) => (doc.category, doc.base_rank),
        };
        Category::from_name(&name, base_rank).map_err(|e| D::Error::custom(e.to_string()))
    }
}

/// A finite object of one of the built-in categories. Stages of a chain use
/// the same representation as enumerated objects; stages are generally not
/// in canonical form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Obj {
    /// Simple graph on vertex ids `0..n` with a sorted edge list (`i < j`).
    Graph {
        n: usize,
        edges: Vec<(usize, usize)>,
    },
    /// Linear order given as its point ids listed in increasing order.
    Order { points: Vec<u64> },
    /// Free abelian group of the given rank.
    Abelian { rank: usize },
    /// Centralizer/free-product tower.
    Tower { tower: Tower },
}

impl Obj {
    /// Number of enumerable elements of the object (vertices, points, basis
    /// vectors, or letters).
    pub fn element_count(&self) -> usize {
        match self {
            Obj::Graph { n, .. } => *n,
            Obj::Order { points } => points.len(),
            Obj::Abelian { rank } => *rank,
            Obj::Tower { tower } => tower.letter_count(),
        }
    }

    pub(crate) fn as_graph(&self) -> Result<(usize, &[(usize, usize)])> {
        match self {
            Obj::Graph { n, edges } => Ok((*n, edges)),
            _ => Err(Error::Input("expected a graph object".into())),
        }
    }

    pub(crate) fn as_order(&self) -> Result<&[u64]> {
        match self {
            Obj::Order { points } => Ok(points),
            _ => Err(Error::Input("expected a linear-order object".into())),
        }
    }

    pub(crate) fn as_abelian(&self) -> Result<usize> {
        match self {
            Obj::Abelian { rank } => Ok(*rank),
            _ => Err(Error::Input("expected an abelian object".into())),
        }
    }

    pub(crate) fn as_tower(&self) -> Result<&Tower> {
        match self {
            Obj::Tower { tower } => Ok(tower),
            _ => Err(Error::Input("expected a tower object".into())),
        }
    }
}

/// An element of a stage, in the stage's own coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Elem {
    Vertex { id: u64 },
    Point { id: u64 },
    Vector { coords: Vec<i64> },
    Word { text: String },
}

/// An element of the chain's union, recorded at the stage where it was
/// observed. Because stages grow in place, pushing forward to a later stage
/// never changes the representation (vectors are zero-padded).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitElem {
    /// 1-based stage index.
    pub stage: usize,
    pub elem: Elem,
}

/// An embedding between objects (or from an object into a stage).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Emb {
    /// For graphs and orders: `map[i]` is the target id of the source's
    /// `i`-th element (vertex index, respectively position in the order).
    Points { map: Vec<u64> },
    /// For abelian groups: row `i` is the image of the `i`-th basis vector.
    Matrix { rows: Vec<Vec<i64>> },
    /// For towers: a verified homomorphism.
    TowerHom { hom: Hom },
}

/// Decides whether `emb` is a special embedding `source -> target` for the
/// category: induced-subgraph maps for graphs, order-preserving maps for
/// orders, pure full-rank (respectively merely full-rank) matrices for the
/// abelian categories, and base-fixing letter-to-conjugated-letter
/// homomorphisms preserving step kinds for the tower categories.
pub fn emb_is_special(cat: &Category, source: &Obj, target: &Obj, emb: &Emb) -> bool {
    match (cat, source, target, emb) {
        (Category::FinGraph, Obj::Graph { n, edges }, Obj::Graph { n: tn, edges: te }, Emb::Points { map }) => {
            finite::graph_emb_ok(*n, edges, *tn, te, map)
        }
        (Category::FinLinorder, Obj::Order { points }, Obj::Order { points: tp }, Emb::Points { map }) => {
            finite::order_emb_ok(points.len(), tp, map)
        }
        (
            Category::FreeAbelianForall,
            Obj::Abelian { rank },
            Obj::Abelian { rank: tr },
            Emb::Matrix { rows },
        ) => finite::abelian_emb_ok(*rank, *tr, rows, true),
        (
            Category::FreeAbelianPlain,
            Obj::Abelian { rank },
            Obj::Abelian { rank: tr },
            Emb::Matrix { rows },
        ) => finite::abelian_emb_ok(*rank, *tr, rows, false),
        (
            Category::Ice { .. } | Category::Fpce | Category::LimitPlain,
            Obj::Tower { tower },
            Obj::Tower { tower: tt },
            Emb::TowerHom { hom },
        ) => hom.source() == tower && hom.target() == tt && towers::tower_emb_is_special(hom),
        _ => false,
    }
}
