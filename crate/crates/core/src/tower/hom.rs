//! Homomorphisms between towers, verified at construction.
//!
//! A hom stores one image word per source generator. Since a tower is
//! presented by its CE relations `[c, t] = 1`, relation preservation is
//! checked against each CE step's recorded centralizer basis: the images of
//! `[c, t]` must be trivial in the target. Composition and application are
//! substitution followed by reduction.

use super::Tower;
use crate::error::{Error, Result};
use crate::word::{Gen, Word};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::BTreeMap;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hom {
    source: Tower,
    target: Tower,
    images: Vec<Word>,
}

impl Hom {
    /// Builds and verifies a homomorphism: every defining relation of the
    /// source must map to a trivial element of the target.
    pub fn new(source: Tower, target: Tower, images: Vec<Word>) -> Result<Hom> {
        if images.len() != source.letter_count() {
            return Err(Error::Input(format!(
                "expected {} generator images, got {}",
                source.letter_count(),
                images.len()
            )));
        }
        for w in &images {
            if let Some(g) = w.max_gen() {
                if g as usize >= target.letter_count() {
                    return Err(Error::Input(
                        "image word uses a generator outside the target tower".into(),
                    ));
                }
            }
        }
        let hom = Hom {
            source,
            target,
            images,
        };
        hom.verify()?;
        Ok(hom)
    }

    /// Construction for internally-derived homs whose relation preservation
    /// holds by construction; re-verified in debug builds.
    pub(crate) fn unchecked(source: Tower, target: Tower, images: Vec<Word>) -> Hom {
        let hom = Hom {
            source,
            target,
            images,
        };
        debug_assert!(hom.verify().is_ok(), "unchecked hom fails verification");
        hom
    }

    fn verify(&self) -> Result<()> {
        for step in self.source.steps() {
            if let super::TowerStep::Ce { letter, basis, .. } = step {
                let t_img = &self.images[*letter as usize];
                for c in basis {
                    let c_img = c.substitute(&self.images);
                    if !self.target.is_trivial(&c_img.commutator(t_img)) {
                        return Err(Error::Domain(format!(
                            "not a homomorphism: the relation [{}, {}] = 1 is not preserved",
                            self.source.print(c),
                            self.source.print(&Word::generator(*letter)),
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn identity(t: &Tower) -> Hom {
        let images = (0..t.letter_count() as Gen).map(Word::generator).collect();
        Hom {
            source: t.clone(),
            target: t.clone(),
            images,
        }
    }

    pub fn source(&self) -> &Tower {
        &self.source
    }

    pub fn target(&self) -> &Tower {
        &self.target
    }

    pub fn images(&self) -> &[Word] {
        &self.images
    }

    pub fn image_of(&self, g: Gen) -> &Word {
        &self.images[g as usize]
    }

    /// Image of an element: generator-wise substitution, then reduction in
    /// the target.
    pub fn apply(&self, w: &Word) -> Word {
        self.target.reduce(&w.substitute(&self.images))
    }

    /// `second ∘ first` (apply `first`, then `second`).
    pub fn compose(second: &Hom, first: &Hom) -> Result<Hom> {
        if second.source != first.target {
            return Err(Error::Input(
                "hom composition mismatch: intermediate towers differ".into(),
            ));
        }
        let images = first.images.iter().map(|w| second.apply(w)).collect();
        Ok(Hom {
            source: first.source.clone(),
            target: second.target.clone(),
            images,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct HomDoc {
    source: Tower,
    target: Tower,
    images: BTreeMap<String, String>,
}

impl Serialize for Hom {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let images = (0..self.source.letter_count())
            .map(|g| {
                (
                    self.source.alphabet().name(g as Gen).to_string(),
                    self.target.print(&self.images[g]),
                )
            })
            .collect();
        HomDoc {
            source: self.source.clone(),
            target: self.target.clone(),
            images,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Hom {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = HomDoc::deserialize(d)?;
        let mut images = Vec::with_capacity(doc.source.letter_count());
        for g in 0..doc.source.letter_count() {
            let name = doc.source.alphabet().name(g as Gen);
            let text = doc
                .images
                .get(name)
                .ok_or_else(|| D::Error::custom(format!("missing image for generator {name}")))?;
            let w = doc
                .target
                .parse(text)
                .map_err(|e| D::Error::custom(e.to_string()))?;
            images.push(w);
        }
        if doc.images.len() != doc.source.letter_count() {
            return Err(D::Error::custom(
                "hom images mention generators outside the source tower",
            ));
        }
        Hom::new(doc.source, doc.target, images).map_err(|e| D::Error::custom(e.to_string()))
    }
}
