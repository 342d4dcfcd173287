//! Small builders for hand-made fixtures in unit tests.

use std::collections::BTreeSet;

use crate::corpus::{AuthorName, Corpus, DocType, Publication};

pub struct PubSpec(Publication);

pub fn pub_with(id: &str) -> PubSpec {
    PubSpec(Publication {
        pub_id: id.to_string(),
        year: 2011,
        doc_type: DocType::Article,
        source_id: "SRC".to_string(),
        subject_categories: BTreeSet::from(["GEN".to_string()]),
        title: String::new(),
        authors: Vec::new(),
        reprint_author_index: None,
        references: BTreeSet::new(),
    })
}

impl PubSpec {
    pub fn year(mut self, year: i32) -> Self {
        self.0.year = year;
        self
    }

    pub fn doc_type(mut self, doc_type: DocType) -> Self {
        self.0.doc_type = doc_type;
        self
    }

    pub fn cats(mut self, cats: &[&str]) -> Self {
        self.0.subject_categories = cats.iter().map(|c| c.to_string()).collect();
        self
    }

    pub fn title(mut self, title: &str) -> Self {
        self.0.title = title.to_string();
        self
    }

    pub fn authors(mut self, names: &[(&str, &str)]) -> Self {
        self.0.authors = names
            .iter()
            .map(|(s, i)| AuthorName::new(s, i).unwrap())
            .collect();
        self
    }

    pub fn reprint(mut self, idx: usize) -> Self {
        self.0.reprint_author_index = Some(idx);
        self
    }

    pub fn refs(mut self, refs: &[&str]) -> Self {
        self.0.references = refs.iter().map(|r| r.to_string()).collect();
        self
    }

    pub fn build(self) -> Publication {
        self.0
    }
}

#[derive(Default)]
pub struct CorpusFixture(Vec<Publication>);

impl CorpusFixture {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(mut self, spec: PubSpec) -> Self {
        self.0.push(spec.0);
        self
    }

    pub fn build(self) -> Corpus {
        Corpus::from_publications(self.0).unwrap()
    }
}
