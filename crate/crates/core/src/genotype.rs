//! Genotype spaces: a gender locus plus a list of trait components.
//!
//! Genotypes are enumerated with the female block first. Inside each gender
//! block the trait vector is ranked lexicographically, so for a space with
//! `m` trait combinations the female genotypes occupy `0..m` and the male
//! genotypes `m..2m`. The mirror of genotype `k` is `(k + m) mod 2m`.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpaceError {
    #[error("genotype space needs at least one trait component")]
    NoComponents,
    #[error("component {component} has no alleles")]
    EmptyComponent { component: usize },
    #[error("component {component} lists allele '{label}' more than once")]
    DuplicateLabel { component: usize, label: String },
    #[error("genotype has {got} trait entries, space has {expected} components")]
    WrongArity { expected: usize, got: usize },
    #[error("allele index {allele} out of range for component {component}")]
    AlleleOutOfRange { component: usize, allele: usize },
    #[error("genotype index {0} out of range")]
    IndexOutOfRange(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Gender {
    Female,
    Male,
}

impl Gender {
    pub const ALL: [Gender; 2] = [Gender::Female, Gender::Male];

    pub fn index(self) -> usize {
        match self {
            Gender::Female => 0,
            Gender::Male => 1,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Gender::Female => "f",
            Gender::Male => "m",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Gender> {
        match s {
            "f" | "F" => Some(Gender::Female),
            "m" | "M" => Some(Gender::Male),
            _ => None,
        }
    }
}

impl fmt::Display for Gender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// A gender together with one allele index per trait component.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Genotype {
    pub gender: Gender,
    pub traits: Vec<usize>,
}

impl Genotype {
    pub fn new(gender: Gender, traits: Vec<usize>) -> Self {
        Self { gender, traits }
    }
}

/// Finite genotype space `G × Φ_1 × … × Φ_l`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenotypeSpace {
    components: Vec<Vec<String>>,
    /// Number of trait combinations (one gender block).
    m: usize,
}

impl GenotypeSpace {
    /// Builds a space from allele labels, one list per trait component.
    pub fn new<S: AsRef<str>>(components: &[Vec<S>]) -> Result<Self, SpaceError> {
        if components.is_empty() {
            return Err(SpaceError::NoComponents);
        }
        let mut owned = Vec::with_capacity(components.len());
        for (ci, comp) in components.iter().enumerate() {
            if comp.is_empty() {
                return Err(SpaceError::EmptyComponent { component: ci });
            }
            let mut seen = BTreeSet::new();
            let mut labels = Vec::with_capacity(comp.len());
            for label in comp {
                let label = label.as_ref().to_string();
                if !seen.insert(label.clone()) {
                    return Err(SpaceError::DuplicateLabel {
                        component: ci,
                        label,
                    });
                }
                labels.push(label);
            }
            owned.push(labels);
        }
        let m = owned.iter().map(Vec::len).product();
        Ok(Self {
            components: owned,
            m,
        })
    }

    /// Single-locus space, the shape used by every concrete model.
    pub fn single<S: AsRef<str>>(alleles: &[S]) -> Result<Self, SpaceError> {
        let comp: Vec<&str> = alleles.iter().map(AsRef::as_ref).collect();
        Self::new(&[comp])
    }

    pub fn components(&self) -> &[Vec<String>] {
        &self.components
    }

    /// Number of trait combinations `m`.
    pub fn trait_count(&self) -> usize {
        self.m
    }

    /// `|Ω| = 2m`.
    pub fn len(&self) -> usize {
        2 * self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    pub fn mirror(&self, k: usize) -> usize {
        (k + self.m) % (2 * self.m)
    }

    pub fn gender_of(&self, k: usize) -> Gender {
        if k < self.m {
            Gender::Female
        } else {
            Gender::Male
        }
    }

    /// Trait rank of genotype `k`, dropping the gender.
    pub fn trait_of(&self, k: usize) -> usize {
        k % self.m
    }

    pub fn genotype_index(&self, gender: Gender, trait_index: usize) -> usize {
        gender.index() * self.m + trait_index
    }

    /// Lexicographic rank of an allele vector.
    pub fn trait_index(&self, traits: &[usize]) -> Result<usize, SpaceError> {
        if traits.len() != self.components.len() {
            return Err(SpaceError::WrongArity {
                expected: self.components.len(),
                got: traits.len(),
            });
        }
        let mut rank = 0;
        for (ci, (&a, comp)) in traits.iter().zip(&self.components).enumerate() {
            if a >= comp.len() {
                return Err(SpaceError::AlleleOutOfRange {
                    component: ci,
                    allele: a,
                });
            }
            rank = rank * comp.len() + a;
        }
        Ok(rank)
    }

    pub fn traits_of(&self, trait_index: usize) -> Vec<usize> {
        let mut out = vec![0; self.components.len()];
        let mut rest = trait_index;
        for (slot, comp) in out.iter_mut().zip(&self.components).rev() {
            *slot = rest % comp.len();
            rest /= comp.len();
        }
        out
    }

    pub fn index(&self, g: &Genotype) -> Result<usize, SpaceError> {
        Ok(self.genotype_index(g.gender, self.trait_index(&g.traits)?))
    }

    pub fn genotype(&self, k: usize) -> Result<Genotype, SpaceError> {
        if k >= self.len() {
            return Err(SpaceError::IndexOutOfRange(k));
        }
        Ok(Genotype::new(
            self.gender_of(k),
            self.traits_of(self.trait_of(k)),
        ))
    }

    /// Trait label: allele labels joined by `/`.
    pub fn trait_label(&self, trait_index: usize) -> String {
        self.traits_of(trait_index)
            .iter()
            .zip(&self.components)
            .map(|(&a, comp)| comp[a].as_str())
            .collect::<Vec<_>>()
            .join("/")
    }

    pub fn trait_labels(&self) -> Vec<String> {
        (0..self.m).map(|t| self.trait_label(t)).collect()
    }

    pub fn find_trait(&self, label: &str) -> Option<usize> {
        let parts: Vec<&str> = label.split('/').map(str::trim).collect();
        if parts.len() != self.components.len() {
            return None;
        }
        let traits = parts
            .iter()
            .zip(&self.components)
            .map(|(p, comp)| comp.iter().position(|a| a == p))
            .collect::<Option<Vec<_>>>()?;
        self.trait_index(&traits).ok()
    }

    /// `(f,A)`-style label of genotype `k`.
    pub fn genotype_label(&self, k: usize) -> String {
        format!(
            "({},{})",
            self.gender_of(k),
            self.trait_label(self.trait_of(k))
        )
    }

    fn check(&self, g: &Genotype) -> Result<(), SpaceError> {
        self.trait_index(&g.traits).map(|_| ())
    }

    /// Mendelian offspring set: genotypes of either gender whose allele at
    /// every component is inherited from one of the parents. Empty for
    /// same-gender parents.
    pub fn mendelian_offspring_set(
        &self,
        a: &Genotype,
        b: &Genotype,
    ) -> Result<BTreeSet<usize>, SpaceError> {
        self.check(a)?;
        self.check(b)?;
        let mut out = BTreeSet::new();
        if a.gender == b.gender {
            return Ok(out);
        }
        let choices: Vec<Vec<usize>> = a
            .traits
            .iter()
            .zip(&b.traits)
            .map(|(&x, &y)| if x == y { vec![x] } else { vec![x, y] })
            .collect();
        let mut combo = vec![0usize; choices.len()];
        loop {
            let traits: Vec<usize> = combo.iter().zip(&choices).map(|(&i, c)| c[i]).collect();
            let t = self.trait_index(&traits)?;
            for g in Gender::ALL {
                out.insert(self.genotype_index(g, t));
            }
            // odometer over the per-component choices
            let mut pos = choices.len();
            loop {
                if pos == 0 {
                    return Ok(out);
                }
                pos -= 1;
                combo[pos] += 1;
                if combo[pos] < choices[pos].len() {
                    break;
                }
                combo[pos] = 0;
            }
        }
    }

    /// Non-Mendelian offspring set: all of Ω for mixed-gender parents.
    pub fn nonmendelian_offspring_set(
        &self,
        a: &Genotype,
        b: &Genotype,
    ) -> Result<BTreeSet<usize>, SpaceError> {
        self.check(a)?;
        self.check(b)?;
        if a.gender == b.gender {
            Ok(BTreeSet::new())
        } else {
            Ok((0..self.len()).collect())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(gender: Gender, t: usize) -> Genotype {
        Genotype::new(gender, vec![t])
    }

    #[test]
    fn trait_space_enumeration() {
        let s = GenotypeSpace::single(&["A", "a"]).unwrap();
        assert_eq!(s.trait_count(), 2);
        assert_eq!(s.len(), 4);
        let labels: Vec<_> = (0..4).map(|k| s.genotype_label(k)).collect();
        assert_eq!(labels, ["(f,A)", "(f,a)", "(m,A)", "(m,a)"]);
    }

    #[test]
    fn four_allele_and_single_allele_sizes() {
        let s = GenotypeSpace::single(&["1", "2", "3", "4"]).unwrap();
        assert_eq!((s.trait_count(), s.len()), (4, 8));
        let s = GenotypeSpace::single(&["x"]).unwrap();
        assert_eq!((s.trait_count(), s.len()), (1, 2));
    }

    #[test]
    fn construction_errors() {
        let empty: Vec<Vec<&str>> = vec![vec!["A"], vec![]];
        assert_eq!(
            GenotypeSpace::new(&empty),
            Err(SpaceError::EmptyComponent { component: 1 })
        );
        assert!(matches!(
            GenotypeSpace::single(&["A", "A"]),
            Err(SpaceError::DuplicateLabel { component: 0, .. })
        ));
        let none: Vec<Vec<&str>> = vec![];
        assert_eq!(GenotypeSpace::new(&none), Err(SpaceError::NoComponents));
    }

    #[test]
    fn multi_component_ranking_is_lexicographic() {
        let s = GenotypeSpace::new(&[vec!["A", "B", "O"], vec!["+", "-"]]).unwrap();
        assert_eq!(s.trait_count(), 6);
        assert_eq!(s.trait_index(&[1, 1]).unwrap(), 3);
        assert_eq!(s.traits_of(5), vec![2, 1]);
        assert_eq!(s.trait_label(3), "B/-");
        assert_eq!(s.find_trait("O/+"), Some(4));
        assert_eq!(s.mirror(2), 8);
        assert_eq!(s.mirror(8), 2);
    }

    #[test]
    fn mendelian_sets_on_trait_space() {
        let s = GenotypeSpace::single(&["A", "a"]).unwrap();
        let f = Gender::Female;
        let m = Gender::Male;
        let set = s.mendelian_offspring_set(&g(f, 0), &g(m, 0)).unwrap();
        assert_eq!(set.into_iter().collect::<Vec<_>>(), vec![0, 2]);
        let set = s.mendelian_offspring_set(&g(f, 0), &g(m, 1)).unwrap();
        assert_eq!(set.len(), 4);
        assert!(s
            .mendelian_offspring_set(&g(f, 0), &g(f, 1))
            .unwrap()
            .is_empty());
    }

    #[test]
    fn mendelian_set_with_four_alleles() {
        let s = GenotypeSpace::single(&["1", "2", "3", "4"]).unwrap();
        let set = s
            .mendelian_offspring_set(&g(Gender::Female, 0), &g(Gender::Male, 1))
            .unwrap();
        assert_eq!(set.into_iter().collect::<Vec<_>>(), vec![0, 1, 4, 5]);
    }

    #[test]
    fn nonmendelian_sets() {
        let s = GenotypeSpace::single(&["+", "-"]).unwrap();
        let all = s
            .nonmendelian_offspring_set(&g(Gender::Female, 0), &g(Gender::Male, 1))
            .unwrap();
        assert_eq!(all.len(), 4);
        assert!(s
            .nonmendelian_offspring_set(&g(Gender::Male, 0), &g(Gender::Male, 1))
            .unwrap()
            .is_empty());
        let one = GenotypeSpace::single(&["x"]).unwrap();
        let set = one
            .nonmendelian_offspring_set(&g(Gender::Female, 0), &g(Gender::Male, 0))
            .unwrap();
        assert_eq!(set.into_iter().collect::<Vec<_>>(), vec![0, 1]);
    }

    #[test]
    fn invalid_genotype_rejected() {
        let s = GenotypeSpace::single(&["A", "a"]).unwrap();
        assert!(s
            .mendelian_offspring_set(&g(Gender::Female, 2), &g(Gender::Male, 0))
            .is_err());
        assert!(s.genotype(4).is_err());
    }
}
