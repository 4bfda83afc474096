use std::collections::HashMap;

use chrono::NaiveDate;
use proptest::prelude::*;

use hoaxattn::attention::{delta_v, median, median_and_mad, modified_z};
use hoaxattn::logstore::store::{aggregate_lines, Coverage};
use hoaxattn::logstore::{clean_title, Cleaned, FilterConfig, RedirectTable, TrafficStore};
use hoaxattn::wikitext::{count_words, strip_markup};
use hoaxattn::CanonicalTitle;

fn t(s: &str) -> CanonicalTitle {
    CanonicalTitle::parse(s).unwrap()
}

fn raw_title() -> impl Strategy<Value = String> {
    prop::collection::vec(
        prop_oneof![
            Just("a".to_string()),
            Just("B".to_string()),
            Just("é".to_string()),
            Just(" ".to_string()),
            Just("_".to_string()),
            Just("#".to_string()),
            Just("%20".to_string()),
            Just("%23".to_string()),
            Just("%25".to_string()),
            Just("%2".to_string()),
            Just("<".to_string()),
            Just("|".to_string()),
            Just(":".to_string()),
            Just("1".to_string()),
        ],
        0..12,
    )
    .prop_map(|v| v.concat())
}

fn log_line() -> impl Strategy<Value = String> {
    let project = prop_oneof![Just("en"), Just("en"), Just("en"), Just("de")];
    let title = prop_oneof![
        Just("Alpha"),
        Just("alpha"),
        Just("Alpha#Intro"),
        Just("Beta"),
        Just("Old_beta"),
        Just("Talk:Alpha"),
        Just("#Top"),
        Just("Ga|mma"),
    ];
    (project, title, 0u64..1000, 0u64..10)
        .prop_map(|(p, t, c, b)| format!("{p} {t} {c} {b}"))
        .boxed()
        .prop_union(Just("garbage line".to_string()).boxed())
}

fn aggregate(lines: &[String]) -> (Vec<(CanonicalTitle, u64)>, u64, u64) {
    let table = RedirectTable::from_pairs([(t("Old_beta"), t("Beta"))]);
    let text = lines.join("\n");
    let (counts, tallies) =
        aggregate_lines(text.as_bytes(), &table, &FilterConfig::default()).unwrap();
    let mut v: Vec<_> = counts.into_iter().collect();
    v.sort();
    (v, tallies.kept, tallies.kept_views)
}

proptest! {
    #[test]
    fn clean_title_is_idempotent(raw in raw_title()) {
        if let Cleaned::Title(c) = clean_title(&raw) {
            prop_assert_eq!(clean_title(c.as_str()), Cleaned::Title(c.clone()));
            prop_assert!(!c.as_str().contains(' '));
            prop_assert!(!c.as_str().starts_with('#'));
        }
    }

    #[test]
    fn resolve_reaches_a_fixpoint(edges in prop::collection::vec((0u8..12, 0u8..12), 0..20)) {
        let name = |i: u8| t(&format!("N{i}"));
        let table = RedirectTable::from_pairs(edges.iter().map(|&(a, b)| (name(a), name(b))));
        for i in 0..12 {
            let n = name(i);
            let once = table.resolve(&n).clone();
            prop_assert_eq!(table.resolve(&once), &once);
        }
    }

    #[test]
    fn aggregation_ignores_line_order_and_conserves_views(
        lines in prop::collection::vec(log_line(), 0..60),
        seed in any::<u64>(),
    ) {
        let (a, kept, kept_views) = aggregate(&lines);
        let mut shuffled = lines.clone();
        let n = shuffled.len();
        for i in (1..n).rev() {
            let j = (seed.wrapping_mul(i as u64 + 7) % (i as u64 + 1)) as usize;
            shuffled.swap(i, j);
        }
        let (b, _, _) = aggregate(&shuffled);
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.iter().map(|(_, c)| c).sum::<u64>(), kept_views);
        prop_assert!(kept as usize <= lines.len());
    }

    #[test]
    fn day0_traffic_is_in_neither_window(day0_views in 1u64..1000, span in 1u32..10) {
        let d0 = NaiveDate::from_ymd_opt(2011, 4, 20).unwrap();
        let cov = Coverage {
            start: d0 - chrono::Duration::days(30),
            end: d0 + chrono::Duration::days(30),
        };
        let store = TrafficStore::from_daily(cov, [(t("A"), d0, day0_views)]);
        let w = store.window_totals([&t("A")], d0, span).unwrap();
        prop_assert_eq!(w.before.len(), span as usize);
        prop_assert!(w.before.iter().chain(&w.after).all(|&x| x == 0));
    }

    #[test]
    fn stripping_never_adds_words(markup in "[a-z \\[\\]|{}'=*#:<>/!-]{0,80}") {
        prop_assert!(count_words(&strip_markup(&markup)) <= count_words(&markup));
    }

    #[test]
    fn delta_v_is_bounded_antisymmetric_and_scale_free(
        b in prop::collection::vec(0u64..100_000, 7),
        a in prop::collection::vec(0u64..100_000, 7),
        k in 1u64..1000,
    ) {
        let f = delta_v(&b, &a).unwrap();
        let r = delta_v(&a, &b).unwrap();
        let scale = |v: &[u64]| v.iter().map(|x| x * k).collect::<Vec<_>>();
        let s = delta_v(&scale(&b), &scale(&a)).unwrap();
        prop_assert_eq!(s.delta_v, f.delta_v);
        match f.delta_v {
            Some(d) => {
                prop_assert!((-1.0..=1.0).contains(&d));
                prop_assert_eq!(r.delta_v, Some(-d));
                prop_assert_eq!(d > 0.0, f.v_before > f.v_after);
            }
            None => prop_assert_eq!(f.v_before + f.v_after, 0.0),
        }
    }

    #[test]
    fn modified_z_is_translation_and_scale_equivariant(
        cohort in prop::collection::vec(-1000i32..1000, 2..30),
        x in -2000i32..2000,
        shift in -500i32..500,
        scale in 1i32..8,
    ) {
        let c: Vec<f64> = cohort.iter().map(|&v| v as f64).collect();
        let moved: Vec<f64> = cohort.iter().map(|&v| (v * scale + shift) as f64).collect();
        match (modified_z(x as f64, &c), modified_z((x * scale + shift) as f64, &moved)) {
            (Ok(a), Ok(b)) => prop_assert!((a.z - b.z).abs() <= 1e-9 * a.z.abs().max(1.0)),
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "{a:?} vs {b:?}"),
        }
    }

    #[test]
    fn median_and_mad_match_sorting(v in prop::collection::vec(-1e6f64..1e6, 1..40)) {
        let sorted_median = |mut w: Vec<f64>| {
            w.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let n = w.len();
            if n % 2 == 1 { w[n / 2] } else { (w[n / 2 - 1] + w[n / 2]) / 2.0 }
        };
        let m = sorted_median(v.clone());
        let mad = sorted_median(v.iter().map(|x| (x - m).abs()).collect());
        prop_assert_eq!(median(&v), Some(m));
        prop_assert_eq!(median_and_mad(&v), Some((m, mad)));
    }
}

#[test]
fn redirected_and_variant_titles_sum_to_one_page() {
    let lines: Vec<String> = [
        "en Beta 2 0",
        "en Old_beta 3 0",
        "en beta#History 4 0",
        "de Beta 100 0",
        "en Beta 5",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let (counts, kept, _) = aggregate(&lines);
    let m: HashMap<_, _> = counts.into_iter().collect();
    assert_eq!(m[&t("Beta")], 9);
    assert_eq!(kept, 3);
}

#[test]
fn file_order_does_not_change_the_store() {
    use hoaxattn::logstore::ingest;
    use hoaxattn::logstore::store::write_log_file;

    let dir = tempfile::tempdir().unwrap();
    let log = hoaxattn::synth::noisy_log(3_000, 200, 5);
    let table = RedirectTable::from_pairs(log.redirects.clone());
    let names = [
        "pagecounts-20100301-230000",
        "pagecounts-20100302-000000.gz",
        "pagecounts-20100302-010000",
    ];
    let mut files = Vec::new();
    for (i, chunk) in log.lines.chunks(1_000).enumerate() {
        let p = dir.path().join(names[i]);
        write_log_file(&p, chunk.iter().map(String::as_str)).unwrap();
        files.push(p);
    }
    let a = ingest(&files, &table, &FilterConfig::default()).store;
    files.reverse();
    let b = ingest(&files, &table, &FilterConfig::default()).store;
    assert_eq!(a, b);
    assert_eq!(a.total_views(), a.tallies().kept_views);

    let store_dir = dir.path().join("store");
    a.write_dir(&store_dir).unwrap();
    assert_eq!(TrafficStore::read_dir(&store_dir).unwrap(), a);
}
