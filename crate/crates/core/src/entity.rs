//! Entity topics, their profiles and per-entity training cutoffs.
//!
//! Topics are read from a JSON array. Each object carries `entity_id`,
//! `canonical_name`, `aliases`, `entity_type`, `profile {kind, text,
//! timestamp}`, `related_entities` and `train_cutoff`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EntityType {
    #[serde(rename = "PER")]
    Per,
    #[serde(rename = "ORG")]
    Org,
    #[serde(rename = "FAC")]
    Fac,
}

impl EntityType {
    pub const ALL: [EntityType; 3] = [EntityType::Per, EntityType::Org, EntityType::Fac];

    pub fn as_str(self) -> &'static str {
        match self {
            EntityType::Per => "PER",
            EntityType::Org => "ORG",
            EntityType::Fac => "FAC",
        }
    }
}

/// Profile kind, which doubles as the popularity segment of an entity.
/// `Null` marks the long tail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileKind {
    Wiki,
    Web,
    Null,
}

impl std::str::FromStr for ProfileKind {
    type Err = crate::error::Error;
    fn from_str(s: &str) -> crate::error::Result<Self> {
        crate::harness::parse_variant(s)
    }
}

impl ProfileKind {
    pub const ALL: [ProfileKind; 3] = [ProfileKind::Wiki, ProfileKind::Web, ProfileKind::Null];

    pub fn as_str(self) -> &'static str {
        match self {
            ProfileKind::Wiki => "wiki",
            ProfileKind::Web => "web",
            ProfileKind::Null => "null",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Profile {
    pub kind: ProfileKind,
    #[serde(default)]
    pub text: String,
    #[serde(default)]
    pub timestamp: Option<i64>,
}

impl Profile {
    pub fn null() -> Self {
        Profile {
            kind: ProfileKind::Null,
            text: String::new(),
            timestamp: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityTopic {
    pub entity_id: String,
    pub canonical_name: String,
    pub aliases: Vec<String>,
    pub entity_type: EntityType,
    pub profile: Profile,
    #[serde(default)]
    pub related_entities: Vec<String>,
    pub train_cutoff: i64,
}

impl EntityTopic {
    fn validate(&self) -> Result<()> {
        if !self.aliases.iter().any(|a| a == &self.canonical_name) {
            return Err(Error::schema(format!(
                "topic {}: canonical name {:?} missing from aliases",
                self.entity_id, self.canonical_name
            )));
        }
        if self.profile.kind == ProfileKind::Null && !self.profile.text.is_empty() {
            return Err(Error::schema(format!(
                "topic {}: null profile carries text",
                self.entity_id
            )));
        }
        Ok(())
    }

    pub fn segment(&self) -> ProfileKind {
        self.profile.kind
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProfileFeatures {
    pub profile_kind: ProfileKind,
    pub profile_len: usize,
    pub related_count: usize,
}

pub fn profile_features(topic: &EntityTopic) -> ProfileFeatures {
    ProfileFeatures {
        profile_kind: topic.profile.kind,
        profile_len: text::tokenize(&topic.profile.text).len(),
        related_count: topic.related_entities.len(),
    }
}

/// Validated, immutable set of topics keyed by entity id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Registry {
    topics: BTreeMap<String, EntityTopic>,
    warnings: Vec<String>,
}

impl Registry {
    /// Validates topics; profiles dated after the owning topic's cutoff are
    /// downgraded to `null` with a warning.
    pub fn from_topics(topics: Vec<EntityTopic>) -> Result<Self> {
        let mut map = BTreeMap::new();
        let mut warnings = Vec::new();
        for mut topic in topics {
            topic.validate()?;
            if let Some(ts) = topic.profile.timestamp {
                if ts > topic.train_cutoff {
                    let msg = format!(
                        "topic {}: {} profile dated {ts} is after the training cutoff {}; profile dropped",
                        topic.entity_id,
                        topic.profile.kind.as_str(),
                        topic.train_cutoff
                    );
                    log::warn!("{msg}");
                    warnings.push(msg);
                    topic.profile = Profile::null();
                }
            }
            if map.contains_key(&topic.entity_id) {
                return Err(Error::Load(format!("duplicate entity_id {}", topic.entity_id)));
            }
            map.insert(topic.entity_id.clone(), topic);
        }
        warnings.sort();
        Ok(Registry {
            topics: map,
            warnings,
        })
    }

    pub fn get(&self, entity_id: &str) -> Option<&EntityTopic> {
        self.topics.get(entity_id)
    }

    /// Topics in ascending entity-id order.
    pub fn iter(&self) -> impl Iterator<Item = &EntityTopic> {
        self.topics.values()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.topics.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.topics.len()
    }

    pub fn is_empty(&self) -> bool {
        self.topics.is_empty()
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn segment_of(&self, entity_id: &str) -> Option<ProfileKind> {
        self.get(entity_id).map(EntityTopic::segment)
    }

    pub fn to_json(&self) -> String {
        let topics: Vec<_> = self.topics.values().collect();
        serde_json::to_string_pretty(&topics).expect("topics serialize")
    }
}

pub fn parse_topics(json: &str) -> Result<Registry> {
    let topics: Vec<EntityTopic> = serde_json::from_str(json).map_err(|e| Error::from_json(e.line(), e))?;
    Registry::from_topics(topics)
}

pub fn load_topics(path: impl AsRef<Path>) -> Result<Registry> {
    let path = path.as_ref();
    let json = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_topics(&json)
}
