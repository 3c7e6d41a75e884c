use gaitscope::catalog::{aggregates, load_catalog, query, shipped_catalog, shipped_catalog_text, CatalogError, Count, Predicate};
use proptest::prelude::*;

#[test]
fn shipped_aggregates_match_headline_counts() {
    let catalog = shipped_catalog();
    let survey = catalog.survey.clone().expect("shipped catalog carries survey facts");
    let s = aggregates(&catalog.records);
    assert_eq!(s.records, survey.reported_dataset_count);
    assert_eq!(s.by_category["clinical"], survey.reported_clinical);
    assert_eq!(s.by_category["general purpose"], survey.reported_general_purpose);
    assert_eq!(s.older_adults.known_sum, survey.reported_older_adults);
    assert!(s.participants.known_sum >= survey.reported_participants_at_least);
    assert_eq!(s.old_style_datasets, survey.reported_old_style_datasets);
    assert!((s.old_style_minutes - 11.65).abs() < 1e-9);
    assert!(s.old_style_minutes <= survey.old_style_minutes_upper_bound);
}

#[test]
fn unknown_counts_stay_out_of_sums() {
    let text = r#"
[[dataset]]
name = "A"
category = "clinical"
participants = 10
older_adults = 4
body_parts = "full_body"
has_old_style = "no"
citation = "a"

[[dataset]]
name = "B"
category = "general_purpose"
participants = "unknown"
older_adults = "unknown"
body_parts = "feet"
has_old_style = "yes"
old_style_minutes = 2.5
citation = "b"
"#;
    let c = load_catalog(text).unwrap();
    let s = aggregates(&c.records);
    assert_eq!((s.participants.known_sum, s.participants.unknown), (10, 1));
    assert_eq!((s.older_adults.known_sum, s.older_adults.unknown), (4, 1));
    assert_eq!(c.records[1].participants, Count::Unknown);
    assert!((s.old_style_minutes - 2.5).abs() < 1e-12);
}

#[test]
fn inconsistent_records_are_rejected() {
    let text = r#"
[[dataset]]
name = "A"
category = "clinical"
participants = 3
older_adults = 5
body_parts = "full_body"
has_old_style = "no"
citation = "a"
"#;
    assert!(matches!(load_catalog(text), Err(CatalogError::Invalid { .. })));
    let negative = text.replace("older_adults = 5", "older_adults = -1");
    assert!(matches!(load_catalog(&negative), Err(CatalogError::Malformed(_))));
}

#[test]
fn shipped_text_round_trips() {
    assert_eq!(load_catalog(shipped_catalog_text()).unwrap(), shipped_catalog());
}

#[test]
fn malformed_queries_report_a_position() {
    for q in ["older_adults >", "bogus = 1", "(name = a", "name = a and"] {
        assert!(q.parse::<Predicate>().is_err(), "{q}");
    }
}

const CLAUSES: [&str; 10] = [
    "older_adults > 0",
    "older_adults = unknown",
    "participants >= 20",
    "category = clinical",
    "body_parts = \"full body\"",
    "has_old_style = yes",
    "motor_skills ~ walk",
    "name ~ a",
    "old_style_minutes < 3",
    "participants != 14",
];

fn predicate() -> impl Strategy<Value = String> {
    let leaf = proptest::sample::select(CLAUSES.to_vec()).prop_map(String::from);
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) and ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) or ({b})")),
            inner.prop_map(|a| format!("not ({a})")),
        ]
    })
}

proptest! {
    #[test]
    fn a_query_and_its_negation_partition_the_catalog(q in predicate()) {
        let catalog = shipped_catalog();
        let p: Predicate = q.parse().unwrap();
        let n: Predicate = format!("not ({q})").parse().unwrap();
        let yes: Vec<&str> = query(&catalog.records, &p).iter().map(|r| r.name.as_str()).collect();
        let no: Vec<&str> = query(&catalog.records, &n).iter().map(|r| r.name.as_str()).collect();
        prop_assert_eq!(yes.len() + no.len(), catalog.records.len());
        prop_assert!(yes.iter().all(|name| !no.contains(name)));
    }
}
