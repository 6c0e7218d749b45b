//! Hand-maintained JSON Schema fragments for every subcommand.
//!
//! `fraisse <command> --schema` prints `{"command", "input", "output"}`:
//! `input` describes the command's arguments and flags as an object schema
//! (positional arguments appear under their value names), `output` describes
//! the JSON document the command emits on success. Errors share one body
//! shape across all commands, described by [`error_schema`].

use serde_json::{json, Value};

/// Every runnable subcommand path, in help order.
pub const COMMAND_PATHS: [&str; 33] = [
    "reduce",
    "eq",
    "root",
    "conj",
    "squares",
    "lattice hnf",
    "lattice snf",
    "lattice pure",
    "lattice complement",
    "lattice type",
    "lattice amalgam",
    "lattice pushout",
    "lattice auto",
    "tower new",
    "tower ce",
    "tower fp",
    "tower normalize",
    "tower reduce",
    "tower eq",
    "tower commutes",
    "retract",
    "discriminate",
    "exp",
    "amalgam ice",
    "amalgam limit",
    "amalgam jep",
    "amalgam demo",
    "chain build",
    "chain locate",
    "chain witness",
    "chain bnf",
    "chain axioms",
    "chain ext",
];

fn word() -> Value {
    json!({
        "type": "string",
        "description": "word text: whitespace-separated tokens GEN or GEN^INT with GEN = [a-z][a-z0-9_]* and INT a nonzero signed decimal; the identity is the single token \"1\""
    })
}

/// A command-line argument holding a JSON document: the argument itself is a
/// string (inline JSON or a file path); `document` is the schema of the JSON
/// it must contain.
fn doc_arg(what: &str, document: Value) -> Value {
    json!({
        "type": "string",
        "description": format!("{what}; inline JSON (first non-space byte '{{' or '[') or a path to a JSON file"),
        "document": document
    })
}

fn alphabet_flag() -> Value {
    json!({
        "type": "string",
        "description": "comma-separated generator names fixing the alphabet and its order; default: generators of the argument words in order of first appearance"
    })
}

fn matrix() -> Value {
    json!({
        "type": "array",
        "items": {"type": "array", "items": {"type": "integer"}},
        "description": "integer matrix as rows; all rows the same length"
    })
}

fn lattice_doc() -> Value {
    json!({
        "type": "object",
        "required": ["ambient_rank", "basis"],
        "properties": {
            "ambient_rank": {"type": "integer", "minimum": 0},
            "basis": matrix()
        },
        "description": "sublattice of Z^ambient_rank; basis rows are independent vectors (canonical row Hermite form on output)"
    })
}

fn tuple_doc() -> Value {
    json!({
        "type": "object",
        "required": ["ambient_rank", "vectors"],
        "properties": {
            "ambient_rank": {"type": "integer", "minimum": 0},
            "vectors": matrix()
        },
        "description": "tuple of vectors in a common Z^ambient_rank; every vector has length ambient_rank"
    })
}

fn tower_doc() -> Value {
    json!({
        "type": "object",
        "required": ["base", "steps"],
        "properties": {
            "base": {"type": "array", "items": {"type": "string"}, "description": "free base generator names"},
            "steps": {
                "type": "array",
                "items": {"oneOf": [
                    {
                        "type": "object",
                        "required": ["kind", "u", "letter"],
                        "properties": {
                            "kind": {"const": "ce"},
                            "u": word(),
                            "letter": {"type": "string"}
                        },
                        "description": "centralizer extension: fresh letter commuting with the centralizer of u"
                    },
                    {
                        "type": "object",
                        "required": ["kind", "letters"],
                        "properties": {
                            "kind": {"const": "fp"},
                            "letters": {"type": "array", "items": {"type": "string"}}
                        },
                        "description": "free product with the free group on fresh letters"
                    }
                ]}
            }
        }
    })
}

fn hom_doc() -> Value {
    json!({
        "type": "object",
        "required": ["source", "target", "images"],
        "properties": {
            "source": tower_doc(),
            "target": tower_doc(),
            "images": {
                "type": "object",
                "additionalProperties": word(),
                "description": "source generator name -> image word over the target"
            }
        },
        "description": "verified homomorphism between towers"
    })
}

fn span_doc() -> Value {
    json!({
        "type": "object",
        "required": ["c", "a", "b"],
        "properties": {
            "c": tower_doc(),
            "a": tower_doc(),
            "b": tower_doc(),
            "witnesses": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["left", "right", "conjugator"],
                    "properties": {
                        "left": {"type": "integer", "description": "0-based index into A's steps above the base"},
                        "right": {"type": "integer", "description": "0-based index into B's steps above the base"},
                        "conjugator": word()
                    }
                },
                "description": "optional conjugators identifying centralizers of the paired CE steps"
            }
        },
        "description": "span A ⊇ C ⊆ B: both legs extend the common tower C by CE steps only"
    })
}

fn category() -> Value {
    json!({
        "oneOf": [
            {
                "type": "string",
                "enum": ["fin_graph", "fin_linorder", "free_abelian_forall", "free_abelian_plain", "fpce", "limit_plain"]
            },
            {
                "type": "object",
                "required": ["category"],
                "properties": {
                    "category": {"type": "string", "enum": ["fin_graph", "fin_linorder", "free_abelian_forall", "free_abelian_plain", "ice", "fpce", "limit_plain"]},
                    "base_rank": {"type": "integer", "minimum": 1, "description": "required for \"ice\""}
                }
            }
        ],
        "description": "category name, bare or wrapped; \"ice\" needs base_rank and so always uses the object form"
    })
}

fn object_doc() -> Value {
    json!({
        "type": "object",
        "required": ["kind"],
        "properties": {"kind": {"type": "string", "enum": ["graph", "order", "abelian", "tower"]}},
        "oneOf": [
            {"properties": {"kind": {"const": "graph"}, "n": {"type": "integer"}, "edges": {"type": "array", "items": {"type": "array", "items": {"type": "integer"}, "minItems": 2, "maxItems": 2}}}, "required": ["kind", "n", "edges"]},
            {"properties": {"kind": {"const": "order"}, "points": {"type": "array", "items": {"type": "integer"}, "description": "point ids in increasing order"}}, "required": ["kind", "points"]},
            {"properties": {"kind": {"const": "abelian"}, "rank": {"type": "integer"}}, "required": ["kind", "rank"]},
            {"properties": {"kind": {"const": "tower"}, "tower": tower_doc()}, "required": ["kind", "tower"]}
        ],
        "description": "finite object of the chain's category"
    })
}

fn embedding_doc() -> Value {
    json!({
        "type": "object",
        "required": ["kind"],
        "oneOf": [
            {"properties": {"kind": {"const": "points"}, "map": {"type": "array", "items": {"type": "integer"}}}, "required": ["kind", "map"]},
            {"properties": {"kind": {"const": "matrix"}, "rows": matrix()}, "required": ["kind", "rows"]},
            {"properties": {"kind": {"const": "tower_hom"}, "hom": hom_doc()}, "required": ["kind", "hom"]}
        ],
        "description": "embedding of an object into another object or a stage"
    })
}

fn limit_elem() -> Value {
    json!({
        "type": "object",
        "required": ["stage", "elem"],
        "properties": {
            "stage": {"type": "integer", "minimum": 1, "description": "1-based stage where the element was observed"},
            "elem": {
                "type": "object",
                "required": ["kind"],
                "oneOf": [
                    {"properties": {"kind": {"const": "vertex"}, "id": {"type": "integer"}}},
                    {"properties": {"kind": {"const": "point"}, "id": {"type": "integer"}}},
                    {"properties": {"kind": {"const": "vector"}, "coords": {"type": "array", "items": {"type": "integer"}}}},
                    {"properties": {"kind": {"const": "word"}, "text": word()}}
                ]
            }
        },
        "description": "element of the chain's union, stable under pushing to later stages"
    })
}

fn chain_doc() -> Value {
    json!({
        "type": "object",
        "required": ["category", "seed", "stages", "connecting", "log"],
        "properties": {
            "category": category(),
            "seed": {"type": "integer"},
            "stages": {"type": "array", "items": object_doc()},
            "connecting": {"type": "array", "items": embedding_doc(), "description": "connecting[i]: stages[i] -> stages[i+1], always a literal inclusion"},
            "log": {"type": "array", "description": "one record per build step: the action taken and the task statuses it settled"}
        },
        "description": "serialized chain; replaying build with the same category, steps and seed reproduces it byte for byte"
    })
}

fn partial_iso() -> Value {
    json!({
        "type": "object",
        "required": ["pairs", "rounds", "verified"],
        "properties": {
            "pairs": {
                "type": "array",
                "items": {"type": "array", "items": limit_elem(), "minItems": 2, "maxItems": 2},
                "description": "matched (left, right) union elements"
            },
            "rounds": {"type": "integer", "description": "completed extension rounds beyond the initial pairing"},
            "verified": {"type": "boolean"},
            "note": {"type": ["string", "null"], "description": "set when the game stopped early, saying where"}
        }
    })
}

fn axiom_check() -> Value {
    json!({
        "type": "object",
        "required": ["pass", "checked"],
        "properties": {
            "pass": {"type": "boolean"},
            "checked": {"type": "integer"},
            "counterexample": {"type": "string"}
        }
    })
}

fn ap_failure_report() -> Value {
    json!({
        "type": "object",
        "required": ["span", "scan_max_len", "words_scanned", "solutions", "all_commuting", "generators_commute", "obstructed", "narrative"],
        "properties": {
            "span": {
                "type": "object",
                "required": ["left_base", "left_image", "right_base", "right_image"],
                "properties": {
                    "left_base": {"type": "array", "items": {"type": "string"}},
                    "left_image": word(),
                    "right_base": {"type": "array", "items": {"type": "string"}},
                    "right_image": word()
                }
            },
            "scan_max_len": {"type": "integer"},
            "words_scanned": {"type": "integer"},
            "solutions": {"type": "array", "items": {"type": "array", "items": word(), "minItems": 3, "maxItems": 3}},
            "all_commuting": {"type": "boolean"},
            "generators_commute": {"type": "boolean"},
            "obstructed": {"type": "boolean", "description": "all_commuting && !generators_commute: the span admits no cocone"},
            "narrative": {"type": "array", "items": {"type": "string"}}
        }
    })
}

/// Shared JSON body emitted on every failure (exit codes 2 and 3).
pub fn error_schema() -> Value {
    json!({
        "type": "object",
        "required": ["error"],
        "properties": {
            "error": {
                "type": "object",
                "required": ["kind", "message"],
                "properties": {
                    "kind": {"type": "string", "enum": ["input", "domain", "needs-witness", "search-failure"]},
                    "message": {"type": "string"},
                    "what": {"type": "string", "description": "search-failure only: which bounded search was exhausted"},
                    "cap": {"type": "integer", "description": "search-failure only: the exhausted budget"},
                    "attempted": {
                        "type": "array",
                        "items": {"type": "array", "prefixItems": [{"type": "string"}, {"type": "integer"}]},
                        "description": "search-failure only: named bounds that were attempted"
                    }
                }
            }
        },
        "description": "exit 2: input/domain/needs-witness; exit 3: search-failure with attempted bounds"
    })
}

fn in_out(command: &str, input: Value, output: Value) -> Value {
    json!({
        "command": command,
        "input": input,
        "output": output,
        "error": error_schema()
    })
}

fn args(required: &[&str], props: Value) -> Value {
    json!({"type": "object", "required": required, "properties": props})
}

/// Schema for one subcommand path (space-joined, e.g. `"lattice hnf"`), or
/// `None` when the path names no runnable command.
pub fn schema_for(path: &str) -> Option<Value> {
    let seed_flag = json!({"type": "integer", "default": 0, "description": "seed for randomized sampling; echoed in the output"});
    let v = match path {
        "reduce" => in_out(
            path,
            args(
                &["word"],
                json!({"word": word(), "alphabet": alphabet_flag()}),
            ),
            args(&["word"], json!({"word": word()})),
        ),
        "eq" => in_out(
            path,
            args(
                &["x", "y"],
                json!({
                    "x": word(),
                    "y": word(),
                    "tower": doc_arg("tower document; when given, equality is Britton equality in the tower", tower_doc()),
                    "alphabet": alphabet_flag()
                }),
            ),
            args(&["equal"], json!({"equal": {"type": "boolean"}})),
        ),
        "root" => in_out(
            path,
            args(
                &["word"],
                json!({"word": word(), "alphabet": alphabet_flag()}),
            ),
            args(
                &["root", "power"],
                json!({
                    "root": word(),
                    "power": {"type": "integer", "minimum": 1, "description": "word = root^power with root not a proper power"}
                }),
            ),
        ),
        "conj" => in_out(
            path,
            args(
                &["x", "y"],
                json!({"x": word(), "y": word(), "alphabet": alphabet_flag()}),
            ),
            args(
                &["conjugate"],
                json!({
                    "conjugate": {"type": "boolean"},
                    "by": {"type": "string", "description": "present when conjugate: g with g^-1 x g = y"}
                }),
            ),
        ),
        "squares" => in_out(
            path,
            args(
                &["max_len"],
                json!({
                    "max_len": {"type": "integer", "minimum": 1, "description": "scan every triple of reduced length <= max_len"},
                    "rank": {"type": "integer", "minimum": 2, "default": 2}
                }),
            ),
            args(
                &["rank", "max_len", "words_scanned", "all_commuting", "solutions"],
                json!({
                    "rank": {"type": "integer"},
                    "max_len": {"type": "integer"},
                    "words_scanned": {"type": "integer"},
                    "all_commuting": {"type": "boolean"},
                    "solutions": {
                        "type": "array",
                        "items": {"type": "array", "items": word(), "minItems": 3, "maxItems": 3},
                        "description": "all (x, y, z) with x^2 y^2 z^2 = 1, shortlex-ordered by (x, y)"
                    }
                }),
            ),
        ),
        "lattice hnf" => in_out(
            path,
            args(&["matrix"], json!({"matrix": doc_arg("integer matrix", matrix())})),
            args(
                &["h", "u"],
                json!({
                    "h": matrix(),
                    "u": matrix(),
                    "description": "row Hermite normal form h = u * matrix with u unimodular"
                }),
            ),
        ),
        "lattice snf" => in_out(
            path,
            args(&["matrix"], json!({"matrix": doc_arg("integer matrix", matrix())})),
            args(
                &["s", "u", "v"],
                json!({
                    "s": matrix(),
                    "u": matrix(),
                    "v": matrix(),
                    "description": "Smith normal form s = u * matrix * v with u, v unimodular"
                }),
            ),
        ),
        "lattice pure" => in_out(
            path,
            args(&["tuple"], json!({"tuple": doc_arg("tuple document", tuple_doc())})),
            lattice_doc(),
        ),
        "lattice complement" => in_out(
            path,
            args(
                &["lattice"],
                json!({"lattice": doc_arg("lattice document (must be pure: Z^n / L torsion-free)", lattice_doc())}),
            ),
            lattice_doc(),
        ),
        "lattice type" => in_out(
            path,
            args(
                &["b", "c"],
                json!({"b": doc_arg("tuple document", tuple_doc()), "c": doc_arg("tuple document", tuple_doc())}),
            ),
            args(
                &["same_type"],
                json!({
                    "same_type": {"type": "boolean"},
                    "iso": {
                        "type": "object",
                        "required": ["source", "target", "basis_matrix"],
                        "properties": {
                            "source": lattice_doc(),
                            "target": lattice_doc(),
                            "basis_matrix": matrix()
                        },
                        "description": "present when same_type: pure-closure isomorphism matching the tuples"
                    }
                }),
            ),
        ),
        "lattice amalgam" => in_out(
            path,
            args(
                &["b", "c"],
                json!({"b": doc_arg("tuple document", tuple_doc()), "c": doc_arg("tuple document", tuple_doc())}),
            ),
            args(
                &["rank", "g1", "g2"],
                json!({
                    "rank": {"type": "integer", "description": "ambient rank of the amalgam"},
                    "g1": matrix(),
                    "g2": matrix(),
                    "description": "pure embeddings with g1(b) = g2(c) componentwise"
                }),
            ),
        ),
        "lattice pushout" => in_out(
            path,
            args(
                &["f1", "f2"],
                json!({
                    "f1": doc_arg("integer matrix (injective map out of the common domain)", matrix()),
                    "f2": doc_arg("integer matrix (injective map out of the common domain)", matrix())
                }),
            ),
            args(
                &["rank", "g1", "g2"],
                json!({
                    "rank": {"type": "integer"},
                    "g1": matrix(),
                    "g2": matrix(),
                    "description": "torsion-free pushout with g1 ∘ f1 = g2 ∘ f2"
                }),
            ),
        ),
        "lattice auto" => in_out(
            path,
            args(
                &["b", "c"],
                json!({"b": doc_arg("tuple document", tuple_doc()), "c": doc_arg("tuple document", tuple_doc())}),
            ),
            args(
                &["matrix"],
                json!({"matrix": {
                    "allOf": [matrix()],
                    "description": "unimodular automorphism of the ambient Z^n sending b to c entry-exact"
                }}),
            ),
        ),
        "tower new" => in_out(
            path,
            args(
                &["base"],
                json!({"base": {"type": "string", "description": "comma-separated base generator names"}}),
            ),
            tower_doc(),
        ),
        "tower ce" => in_out(
            path,
            args(
                &["tower", "u", "letter"],
                json!({
                    "tower": doc_arg("tower document", tower_doc()),
                    "u": word(),
                    "letter": {"type": "string", "description": "fresh letter name"}
                }),
            ),
            tower_doc(),
        ),
        "tower fp" => in_out(
            path,
            args(
                &["tower", "letters"],
                json!({
                    "tower": doc_arg("tower document", tower_doc()),
                    "letters": {"type": "array", "items": {"type": "string"}, "minItems": 1, "description": "fresh letter names"}
                }),
            ),
            tower_doc(),
        ),
        "tower normalize" => in_out(
            path,
            args(&["tower"], json!({"tower": doc_arg("tower document", tower_doc())})),
            args(
                &["tower", "map"],
                json!({
                    "tower": tower_doc(),
                    "map": {
                        "type": "array",
                        "items": {"type": "integer"},
                        "description": "map[i] = index in the normalized tower of the input tower's i-th generator (names are preserved)"
                    }
                }),
            ),
        ),
        "tower reduce" => in_out(
            path,
            args(
                &["tower", "word"],
                json!({"tower": doc_arg("tower document", tower_doc()), "word": word()}),
            ),
            args(&["word"], json!({"word": word()})),
        ),
        "tower eq" => in_out(
            path,
            args(
                &["tower", "x", "y"],
                json!({"tower": doc_arg("tower document", tower_doc()), "x": word(), "y": word()}),
            ),
            args(&["equal"], json!({"equal": {"type": "boolean"}})),
        ),
        "tower commutes" => in_out(
            path,
            args(
                &["tower", "x", "y"],
                json!({"tower": doc_arg("tower document", tower_doc()), "x": word(), "y": word()}),
            ),
            args(&["commutes"], json!({"commutes": {"type": "boolean"}})),
        ),
        "retract" => in_out(
            path,
            args(
                &["tower"],
                json!({
                    "tower": doc_arg("tower document whose top step is a centralizer extension", tower_doc()),
                    "exponent": {"type": "integer", "default": 1, "description": "nonzero k: the top letter maps to the k-th power of its step core"}
                }),
            ),
            hom_doc(),
        ),
        "discriminate" => in_out(
            path,
            args(
                &["tower", "words"],
                json!({
                    "tower": doc_arg("tower document", tower_doc()),
                    "words": {"type": "array", "items": word(), "minItems": 1, "description": "finite set the retraction must separate"},
                    "to_free": {"type": "boolean", "default": false, "description": "retract all the way to the free base (normalizes free factors first)"},
                    "levels": {"type": "integer", "description": "without --to-free: how many top CE levels to retract through; default: the tower's depth"},
                    "exp_cap": {"type": "integer", "default": 1024, "description": "per-level exponent cap for the doubling search"},
                    "subst_cap": {"type": "integer", "default": 20000, "description": "with --to-free: total budget for free-letter substitution search"}
                }),
            ),
            hom_doc(),
        ),
        "exp" => in_out(
            path,
            args(
                &["base", "word", "poly"],
                json!({
                    "base": doc_arg("tower document with no steps (a bare free base)", tower_doc()),
                    "word": word(),
                    "poly": doc_arg("integer polynomial p(t) as a JSON array of coefficients, constant term first", json!({"type": "array", "items": {"type": "integer"}})),
                    "eval": {"type": "integer", "description": "optional nonzero k: also emit the evaluation retraction sending the result to word^(m*p(k)) in the base"}
                }),
            ),
            args(
                &["tower", "word"],
                json!({
                    "tower": tower_doc(),
                    "word": word(),
                    "eval": {
                        "type": "object",
                        "required": ["k", "hom"],
                        "properties": {"k": {"type": "integer"}, "hom": hom_doc()},
                        "description": "present when --eval was given"
                    }
                }),
            ),
        ),
        "amalgam ice" => in_out(
            path,
            args(&["span"], json!({"span": doc_arg("span document", span_doc())})),
            args(
                &["d", "g1", "g2"],
                json!({
                    "d": tower_doc(),
                    "g1": hom_doc(),
                    "g2": hom_doc(),
                    "description": "cocone: g1 from the span's A and g2 from its B into d, agreeing on C"
                }),
            ),
        ),
        "amalgam limit" => in_out(
            path,
            args(
                &["span"],
                json!({
                    "span": doc_arg("span document", span_doc()),
                    "sample": {"type": "array", "items": word(), "description": "repeatable: words the certificate retraction must separate"},
                    "exp_cap": {"type": "integer", "default": 1024}
                }),
            ),
            args(
                &["n", "emb_l", "emb_m", "gamma_gens", "cert"],
                json!({
                    "n": tower_doc(),
                    "emb_l": hom_doc(),
                    "emb_m": hom_doc(),
                    "gamma_gens": {"type": "array", "items": word(), "description": "images in n of both legs' generators, left first"},
                    "cert": {"allOf": [hom_doc()], "description": "retraction n -> left leg, injective on the sample"}
                }),
            ),
        ),
        "amalgam jep" => in_out(
            path,
            args(
                &["l", "m"],
                json!({
                    "l": doc_arg("tower document (left factor; nonabelian after normalization)", tower_doc()),
                    "m": doc_arg("tower document (right factor)", tower_doc()),
                    "sample": {"type": "array", "items": word(), "description": "repeatable: words the certificate retraction must separate"},
                    "exp_cap": {"type": "integer", "default": 1024},
                    "subst_cap": {"type": "integer", "default": 20000}
                }),
            ),
            args(
                &["p", "l", "cert", "renames"],
                json!({
                    "p": tower_doc(),
                    "l": tower_doc(),
                    "cert": {"allOf": [hom_doc()], "description": "retraction p -> l, injective on the sample"},
                    "renames": {
                        "type": "array",
                        "items": {"type": "array", "prefixItems": [{"type": "string"}, {"type": "string"}]},
                        "description": "(old, new) names for right-factor generators renamed in the merge"
                    }
                }),
            ),
        ),
        "amalgam demo" => in_out(
            path,
            args(
                &[],
                json!({"max_len": {"type": "integer", "default": 3, "description": "scan scale for the three-squares certificate"}}),
            ),
            ap_failure_report(),
        ),
        "chain build" => in_out(
            path,
            args(
                &["category", "steps"],
                json!({
                    "category": doc_arg("category name or JSON object", category()),
                    "steps": {"type": "integer", "minimum": 1},
                    "seed": seed_flag
                }),
            ),
            chain_doc(),
        ),
        "chain locate" => in_out(
            path,
            args(
                &["chain", "object"],
                json!({"chain": doc_arg("chain document", chain_doc()), "object": doc_arg("object document", object_doc())}),
            ),
            json!({
                "oneOf": [
                    {
                        "type": "object",
                        "required": ["kind", "stage", "emb"],
                        "properties": {"kind": {"const": "found"}, "stage": {"type": "integer"}, "emb": embedding_doc()}
                    },
                    {
                        "type": "object",
                        "required": ["kind", "horizon"],
                        "properties": {
                            "kind": {"const": "not_yet"},
                            "horizon": {"type": ["integer", "null"], "description": "step by which the join schedule brings the object in, when recoverable"}
                        }
                    }
                ]
            }),
        ),
        "chain witness" => in_out(
            path,
            args(
                &["chain", "a", "b", "iso"],
                json!({
                    "chain": doc_arg("chain document", chain_doc()),
                    "a": doc_arg("object document", object_doc()),
                    "b": doc_arg("object document", object_doc()),
                    "iso": doc_arg("isomorphism as a JSON array of [from, to] element-name pairs (vertex/point indices, e{i} basis vectors, or tower letter names)", json!({"type": "array", "items": {"type": "array", "prefixItems": [{"type": "string"}, {"type": "string"}]}})),
                    "depth": {"type": "integer", "default": 2, "description": "alternating one-point extension rounds to play"}
                }),
            ),
            partial_iso(),
        ),
        "chain bnf" => in_out(
            path,
            args(
                &["x", "y"],
                json!({
                    "x": doc_arg("chain document", chain_doc()),
                    "y": doc_arg("chain document of the same category", chain_doc()),
                    "depth": {"type": "integer", "default": 10, "description": "back-and-forth rounds to play from the empty pairing"}
                }),
            ),
            partial_iso(),
        ),
        "chain axioms" => in_out(
            path,
            args(
                &["category"],
                json!({
                    "category": doc_arg("category name or JSON object", category()),
                    "budget": {"type": "integer", "default": 8, "description": "objects checked per property (capped per category)"}
                }),
            ),
            args(
                &[
                    "category", "budget", "iso_invariance", "hereditary", "joint_embedding",
                    "amalgamation", "identity_special", "composition_special", "interpolation_special"
                ],
                json!({
                    "category": category(),
                    "budget": {"type": "integer"},
                    "iso_invariance": axiom_check(),
                    "hereditary": axiom_check(),
                    "joint_embedding": axiom_check(),
                    "amalgamation": axiom_check(),
                    "identity_special": axiom_check(),
                    "composition_special": axiom_check(),
                    "interpolation_special": axiom_check(),
                    "ap_obstruction": {
                        "allOf": [ap_failure_report()],
                        "description": "limit_plain only: the square-span obstruction behind the amalgamation failure"
                    }
                }),
            ),
        ),
        "chain ext" => in_out(
            path,
            args(
                &["chain"],
                json!({
                    "chain": doc_arg("chain document", chain_doc()),
                    "trials": {"type": "integer", "default": 50},
                    "seed": seed_flag
                }),
            ),
            args(
                &["category", "seed", "trials", "discharged", "not_yet", "failed", "skipped"],
                json!({
                    "category": category(),
                    "seed": {"type": "integer"},
                    "trials": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["description", "outcome"],
                            "properties": {
                                "description": {"type": "string"},
                                "outcome": {
                                    "type": "object",
                                    "required": ["status"],
                                    "properties": {
                                        "status": {"type": "string", "enum": ["discharged", "not_yet", "failed", "skipped"]},
                                        "stage": {"type": "integer"},
                                        "horizon": {"type": "integer"},
                                        "reason": {"type": "string"}
                                    }
                                }
                            }
                        }
                    },
                    "discharged": {"type": "integer"},
                    "not_yet": {"type": "integer"},
                    "failed": {"type": "integer"},
                    "skipped": {"type": "integer"}
                }),
            ),
        ),
        _ => return None,
    };
    Some(v)
}

/// Index document listing every command path, printed by a bare `--schema`.
pub fn index() -> Value {
    json!({
        "commands": COMMAND_PATHS.to_vec(),
        "note": "run `fraisse <command> --schema` for one command's input/output schema"
    })
}
