//! Rule-based classification of scene elements per engineering profile.
//!
//! A profile is an ordered list of case-insensitive substring rules over an
//! element's name, category or material. The first matching rule decides;
//! elements no rule matches are irrelevant. Sky and ground are always
//! irrelevant.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scene_io::LabelMask;

pub const SKY_ID: u16 = 0;
pub const GROUND_ID: u16 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Element {
    pub id: u16,
    pub name: String,
    pub category: String,
    pub material: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementCatalog {
    pub elements: Vec<Element>,
}

impl ElementCatalog {
    pub fn new(elements: Vec<Element>) -> Result<Self> {
        let catalog = Self { elements };
        catalog.validate()?;
        Ok(catalog)
    }

    /// IDs unique and above the reserved sky/ground range.
    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for e in &self.elements {
            if e.id <= GROUND_ID {
                return Err(Error::MalformedCatalog(format!(
                    "element id {} is reserved (0 = sky, 1 = ground)",
                    e.id
                )));
            }
            if !seen.insert(e.id) {
                return Err(Error::MalformedCatalog(format!("duplicate element id {}", e.id)));
            }
        }
        Ok(())
    }

    pub fn contains(&self, id: u16) -> bool {
        self.elements.iter().any(|e| e.id == id)
    }

    pub fn get(&self, id: u16) -> Option<&Element> {
        self.elements.iter().find(|e| e.id == id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchField {
    Name,
    Category,
    Material,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Relevant,
    Irrelevant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rule {
    pub field: MatchField,
    pub pattern: String,
    pub verdict: Verdict,
}

impl Rule {
    pub fn new(field: MatchField, pattern: &str, verdict: Verdict) -> Self {
        Self {
            field,
            pattern: pattern.to_string(),
            verdict,
        }
    }

    fn matches(&self, element: &Element) -> bool {
        let text = match self.field {
            MatchField::Name => &element.name,
            MatchField::Category => &element.category,
            MatchField::Material => &element.material,
        };
        text.to_lowercase().contains(&self.pattern.to_lowercase())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Profile {
    pub name: String,
    pub rules: Vec<Rule>,
}

impl Profile {
    pub fn new(name: &str, rules: Vec<Rule>) -> Result<Self> {
        let profile = Self {
            name: name.to_string(),
            rules,
        };
        profile.validate()?;
        Ok(profile)
    }

    fn validate(&self) -> Result<()> {
        if self.rules.is_empty() {
            return Err(Error::MalformedRulePack(format!(
                "profile '{}' has no rules",
                self.name
            )));
        }
        if self.rules.iter().any(|r| r.pattern.is_empty()) {
            return Err(Error::MalformedRulePack(format!(
                "profile '{}' has an empty pattern",
                self.name
            )));
        }
        Ok(())
    }

    /// Verdict of the first matching rule, irrelevant when none matches.
    pub fn verdict_for(&self, element: &Element) -> Verdict {
        self.rules
            .iter()
            .find(|r| r.matches(element))
            .map_or(Verdict::Irrelevant, |r| r.verdict)
    }
}

fn keyword_profile(name: &str, keywords: &[&str]) -> Profile {
    let rules = keywords
        .iter()
        .flat_map(|k| {
            [
                Rule::new(MatchField::Category, k, Verdict::Relevant),
                Rule::new(MatchField::Name, k, Verdict::Relevant),
            ]
        })
        .collect();
    Profile {
        name: name.to_string(),
        rules,
    }
}

/// The built-in structure, method and plumbing profiles.
pub fn default_profiles() -> Vec<Profile> {
    vec![
        keyword_profile(
            "structure",
            &[
                "wall", "roof", "beam", "slab", "column", "frame", "concrete", "metal",
            ],
        ),
        keyword_profile("method", &["crane", "scaffold", "formwork", "fence", "access"]),
        keyword_profile("plumbing", &["pipe", "duct", "valve", "pump"]),
    ]
}

#[derive(Debug, Deserialize)]
struct RulePack {
    profiles: Vec<Profile>,
}

/// Parse a `profiles.json` rule pack.
pub fn parse_rule_pack(json: &str) -> Result<Vec<Profile>> {
    let pack: RulePack = serde_json::from_str(json).map_err(|e| Error::MalformedRulePack(e.to_string()))?;
    for p in &pack.profiles {
        p.validate()?;
    }
    Ok(pack.profiles)
}

pub fn load_rule_pack(path: &Path) -> Result<Vec<Profile>> {
    if !path.is_file() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    parse_rule_pack(&std::fs::read_to_string(path)?)
}

/// Built-ins, with any pack profile replacing the built-in of the same name.
pub fn merged_profiles(pack: &[Profile]) -> Vec<Profile> {
    let mut out = default_profiles();
    for p in pack {
        match out.iter_mut().find(|q| q.name == p.name) {
            Some(slot) => *slot = p.clone(),
            None => out.push(p.clone()),
        }
    }
    out
}

pub fn resolve_profile(name: &str, pack: &[Profile]) -> Result<Profile> {
    merged_profiles(pack)
        .into_iter()
        .find(|p| p.name == name)
        .ok_or_else(|| Error::UnknownProfile(name.to_string()))
}

/// Element ID → verdict, total over the catalog plus sky and ground.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelevanceMap {
    verdicts: BTreeMap<u16, Verdict>,
}

impl RelevanceMap {
    pub fn get(&self, id: u16) -> Option<Verdict> {
        self.verdicts.get(&id).copied()
    }

    pub fn len(&self) -> usize {
        self.verdicts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.verdicts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u16, Verdict)> + '_ {
        self.verdicts.iter().map(|(&k, &v)| (k, v))
    }

    pub fn relevant_ids(&self) -> Vec<u16> {
        self.iter()
            .filter(|(_, v)| *v == Verdict::Relevant)
            .map(|(k, _)| k)
            .collect()
    }
}

pub fn classify(catalog: &ElementCatalog, profile: &Profile) -> RelevanceMap {
    let mut verdicts = BTreeMap::new();
    verdicts.insert(SKY_ID, Verdict::Irrelevant);
    verdicts.insert(GROUND_ID, Verdict::Irrelevant);
    for e in &catalog.elements {
        if e.id > GROUND_ID {
            verdicts.insert(e.id, profile.verdict_for(e));
        }
    }
    RelevanceMap { verdicts }
}

/// A set of pixel indices over a `width`×`height` raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PixelSet {
    width: usize,
    height: usize,
    members: Vec<bool>,
    count: usize,
}

impl PixelSet {
    pub fn empty(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            members: vec![false; width * height],
            count: 0,
        }
    }

    pub fn from_mask(width: usize, height: usize, members: Vec<bool>) -> Self {
        assert_eq!(members.len(), width * height);
        let count = members.iter().filter(|&&m| m).count();
        Self {
            width,
            height,
            members,
            count,
        }
    }

    pub fn insert(&mut self, idx: usize) {
        if !self.members[idx] {
            self.members[idx] = true;
            self.count += 1;
        }
    }

    #[inline]
    pub fn contains(&self, idx: usize) -> bool {
        self.members[idx]
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members
            .iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(i, _)| i)
    }

    pub fn complement(&self) -> Self {
        Self::from_mask(
            self.width,
            self.height,
            self.members.iter().map(|&m| !m).collect(),
        )
    }
}

/// Partition the pixels of `mask` into (relevant, irrelevant).
pub fn relevance_masks(mask: &LabelMask, relevance: &RelevanceMap) -> Result<(PixelSet, PixelSet)> {
    let (w, h) = mask.dims();
    let mut relevant = vec![false; w * h];
    for (i, &id) in mask.ids().iter().enumerate() {
        match relevance.get(id) {
            Some(Verdict::Relevant) => relevant[i] = true,
            Some(Verdict::Irrelevant) => {}
            None => return Err(Error::UnknownElementId(id)),
        }
    }
    let relevant = PixelSet::from_mask(w, h, relevant);
    let irrelevant = relevant.complement();
    Ok((relevant, irrelevant))
}
