//! Small hand-built knowledge bases used by tests, examples and the guide.

/// How the location fixture's taxonomy is shaped.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum LocationTaxonomy {
    /// Every city is a `USCity`.
    UsCity,
    /// Heterogeneous direct types whose most specific common concepts are
    /// `GeopoliticalEntity`, `GeographicalRegion` and
    /// `TerrestrialFunctioningObject`.
    Mixed,
}

/// Rule id of the location rule.
pub const LOCATION_RULE: &str = "A2";

const LOCATION_RULE_TEXT: &str = "(rule A2 (ante (objectFoundInLocation ?ARG1 ?ARG2) (geopoliticalSubdivision ?OTHER ?ARG2)) (conseq (objectFoundInLocation ?ARG1 ?OTHER)))\n";

const LOCATION_FACTS: &str = "\
(fact (objectFoundInLocation UnivOfMinnesota CityOfMinneapolisMN))
(fact (objectFoundInLocation Ginna-NuclearPowerPlant CityOfRochesterNY))
(fact (objectFoundInLocation AngelStadiumOfAnaheim CityOfAnaheimCA))
(fact (geopoliticalSubdivision Minnesota-State CityOfMinneapolisMN))
(fact (geopoliticalSubdivision NewYork-State CityOfRochesterNY))
(fact (geopoliticalSubdivision California-State CityOfAnaheimCA))
";

const SHARED_TAXONOMY: &str = "\
(genls GeographicalRegion PartiallyTangible)
(genls TerrestrialFunctioningObject PartiallyTangible)
(genls PartiallyTangible Thing)
(genls PopulatedPlace GeographicalRegion)
(genls AdministrativeRegion GeographicalRegion)
(genls PhysiographicRegion GeographicalRegion)
(genls GeopoliticalEntity GeographicalRegion)
(genls University TerrestrialFunctioningObject)
(genls PowerPlant TerrestrialFunctioningObject)
(genls Stadium TerrestrialFunctioningObject)
(isa Minnesota-State PopulatedPlace)
(isa NewYork-State AdministrativeRegion)
(isa California-State PhysiographicRegion)
(isa UnivOfMinnesota University)
(isa Ginna-NuclearPowerPlant PowerPlant)
(isa AngelStadiumOfAnaheim Stadium)
(generality Thing 1000)
(generality PartiallyTangible 500)
(generality TerrestrialFunctioningObject 30)
(generality GeographicalRegion 20)
(generality GeopoliticalEntity 10)
(generality PopulatedPlace 8)
(generality AdministrativeRegion 8)
(generality PhysiographicRegion 8)
(generality University 4)
(generality PowerPlant 4)
(generality Stadium 4)
";

const US_CITY: &str = "\
(genls USCity City)
(genls City GeopoliticalEntity)
(isa CityOfMinneapolisMN USCity)
(isa CityOfRochesterNY USCity)
(isa CityOfAnaheimCA USCity)
(generality USCity 5)
(generality City 6)
";

const MIXED_CITIES: &str = "\
(genls USCity GeopoliticalEntity)
(genls NewYorkTown GeopoliticalEntity)
(genls CaliforniaCity GeopoliticalEntity)
(isa CityOfMinneapolisMN USCity)
(isa CityOfRochesterNY NewYorkTown)
(isa CityOfAnaheimCA CaliforniaCity)
(generality USCity 5)
(generality NewYorkTown 5)
(generality CaliforniaCity 5)
";

/// The three-tuple location example: one rule, six facts and a taxonomy.
pub fn location_kb_text(taxonomy: LocationTaxonomy) -> String {
    let cities = match taxonomy {
        LocationTaxonomy::UsCity => US_CITY,
        LocationTaxonomy::Mixed => MIXED_CITIES,
    };
    [SHARED_TAXONOMY, cities, LOCATION_FACTS, LOCATION_RULE_TEXT].concat()
}

/// One relevant rule for `(g ?x e0)` plus `distractors` rules whose
/// training facts live in another domain. The relevant rule id sorts last,
/// so the depth baseline meets every distractor first.
pub fn distractor_kb_text(distractors: usize) -> String {
    let mut s = String::from("(genls Home Thing)\n(genls Away Thing)\n(isa e0 Home)\n(isa a0 Home)\n");
    s.push_str("(fact (s e0 a0))\n(rule zz-relevant (ante (s ?y ?x)) (conseq (g ?x ?y)))\n");
    for i in 0..5 {
        s.push_str(&format!("(isa u{i} Away)\n(isa v{i} Away)\n"));
    }
    for j in 0..distractors {
        for i in 0..5 {
            s.push_str(&format!("(fact (d{j:03} u{i} v{i}))\n"));
        }
        s.push_str(&format!("(rule d{j:03}-rule (ante (d{j:03} ?x ?y)) (conseq (g ?x ?y)))\n"));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::load_kb;

    #[test]
    fn fixtures_load() {
        for t in [LocationTaxonomy::UsCity, LocationTaxonomy::Mixed] {
            let kb = load_kb(location_kb_text(t).as_bytes()).unwrap();
            assert_eq!(kb.rules().len(), 1);
        }
        let kb = load_kb(distractor_kb_text(50).as_bytes()).unwrap();
        assert_eq!(kb.rules().len(), 51);
    }
}
