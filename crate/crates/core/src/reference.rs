//! Static reference lists: legislated federal tax changes, state-level
//! variables and state codes.

use std::collections::BTreeMap;

use crate::panel::ShockSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TaxAct {
    pub name: &'static str,
    pub year: i64,
    pub personal: bool,
    pub corporate: bool,
}

pub const TAX_ACTS: [TaxAct; 13] = [
    TaxAct { name: "Tax Reduction and Simplification Act of 1977", year: 1977, personal: true, corporate: true },
    TaxAct { name: "Revenue Act of 1978", year: 1978, personal: true, corporate: true },
    TaxAct { name: "Economic Recovery Tax Act of 1981", year: 1981, personal: true, corporate: true },
    TaxAct { name: "Deficit Reduction Act of 1984", year: 1984, personal: true, corporate: true },
    TaxAct { name: "Tax Reform Act of 1986", year: 1986, personal: true, corporate: true },
    TaxAct { name: "Omnibus Budget Reconciliation Act of 1987", year: 1987, personal: true, corporate: true },
    TaxAct { name: "Omnibus Budget Reconciliation Act of 1990", year: 1990, personal: true, corporate: true },
    TaxAct { name: "Omnibus Budget Reconciliation Act of 1993", year: 1993, personal: true, corporate: false },
    TaxAct { name: "Jobs and Growth Tax Relief Reconciliation Act of 2003", year: 2003, personal: true, corporate: true },
    TaxAct {
        name: "The Tax Relief, Unemployment Insurance Reauthorization, and Job Creation Act of 2010",
        year: 2010,
        personal: true,
        corporate: false,
    },
    TaxAct { name: "The Patient Protection and Affordable Care Act 2010", year: 2010, personal: true, corporate: true },
    TaxAct { name: "The American Taxpayer Relief Act of 2012", year: 2012, personal: true, corporate: true },
    TaxAct { name: "The Tax Cuts and Jobs Act of 2017", year: 2017, personal: true, corporate: true },
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaxKind {
    Personal,
    Corporate,
}

impl TaxKind {
    pub fn shock_id(self) -> &'static str {
        match self {
            TaxKind::Personal => "PIT",
            TaxKind::Corporate => "CIT",
        }
    }
}

pub fn acts_for(kind: TaxKind) -> impl Iterator<Item = &'static TaxAct> {
    TAX_ACTS.iter().filter(move |a| match kind {
        TaxKind::Personal => a.personal,
        TaxKind::Corporate => a.corporate,
    })
}

/// 0/1 event indicator over `first..=last`. Several acts in one year give
/// a single 1 with their names joined by `"; "`.
pub fn narrative_dummy(kind: TaxKind, first: i64, last: i64) -> ShockSeries {
    let mut labels: BTreeMap<i64, String> = BTreeMap::new();
    for a in acts_for(kind).filter(|a| (first..=last).contains(&a.year)) {
        labels
            .entry(a.year)
            .and_modify(|l| {
                l.push_str("; ");
                l.push_str(a.name);
            })
            .or_insert_with(|| a.name.to_string());
    }
    let time_index: Vec<i64> = (first..=last).collect();
    let values = time_index
        .iter()
        .map(|y| if labels.contains_key(y) { 1.0 } else { 0.0 })
        .collect();
    ShockSeries {
        shock_id: kind.shock_id().to_string(),
        time_index,
        values,
        event_labels: labels,
    }
}

/// `(name, mnemonic)` of the state-level variables.
pub const STATE_VARIABLES: [(&str, &str); 4] = [
    ("Real GDP", "RGSP"),
    ("Disposable Personal Income", "DPI"),
    ("Total Nonfarm Payroll Employment", "PAYEMS"),
    ("Price Level", "CPI"),
];

pub const STATES: [(&str, &str); 50] = [
    ("Alabama", "AL"),
    ("Alaska", "AK"),
    ("Arizona", "AZ"),
    ("Arkansas", "AR"),
    ("California", "CA"),
    ("Colorado", "CO"),
    ("Connecticut", "CT"),
    ("Delaware", "DE"),
    ("Florida", "FL"),
    ("Georgia", "GA"),
    ("Hawaii", "HI"),
    ("Idaho", "ID"),
    ("Illinois", "IL"),
    ("Indiana", "IN"),
    ("Iowa", "IA"),
    ("Kansas", "KS"),
    ("Kentucky", "KY"),
    ("Louisiana", "LA"),
    ("Maine", "ME"),
    ("Maryland", "MD"),
    ("Massachusetts", "MA"),
    ("Michigan", "MI"),
    ("Minnesota", "MN"),
    ("Mississippi", "MS"),
    ("Missouri", "MO"),
    ("Montana", "MT"),
    ("Nebraska", "NE"),
    ("Nevada", "NV"),
    ("New Hampshire", "NH"),
    ("New Jersey", "NJ"),
    ("New Mexico", "NM"),
    ("New York", "NY"),
    ("North Carolina", "NC"),
    ("North Dakota", "ND"),
    ("Ohio", "OH"),
    ("Oklahoma", "OK"),
    ("Oregon", "OR"),
    ("Pennsylvania", "PA"),
    ("Rhode Island", "RI"),
    ("South Carolina", "SC"),
    ("South Dakota", "SD"),
    ("Tennessee", "TN"),
    ("Texas", "TX"),
    ("Utah", "UT"),
    ("Vermont", "VT"),
    ("Virginia", "VA"),
    ("Washington", "WA"),
    ("West Virginia", "WV"),
    ("Wisconsin", "WI"),
    ("Wyoming", "WY"),
];

pub fn is_state_code(code: &str) -> bool {
    STATES.iter().any(|(_, c)| *c == code)
}
