#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use regex::Regex;

/// Topic filter matcher built on `regex`, sharing no code with the broker.
pub struct RefFilter(Regex);

impl RefFilter {
    pub fn new(filter: &str) -> RefFilter {
        let levels: Vec<&str> = filter.split('/').collect();
        let mut pat = String::from("^");
        for (i, level) in levels.iter().enumerate() {
            match *level {
                "#" if i == 0 => pat.push_str(".+"),
                "#" => pat.push_str("(/.+)?"),
                "+" => {
                    if i > 0 {
                        pat.push('/');
                    }
                    pat.push_str("[^/]+");
                }
                lit => {
                    if i > 0 {
                        pat.push('/');
                    }
                    pat.push_str(&regex::escape(lit));
                }
            }
        }
        pat.push('$');
        RefFilter(Regex::new(&pat).expect("reference pattern"))
    }

    pub fn matches(&self, topic: &str) -> bool {
        self.0.is_match(topic)
    }
}

const WORDS: &[&str] = &["bsm", "raw", "queue", "rsu1", "cv2", "a", "b.c", "x-y"];

pub fn random_topic<R: Rng>(rng: &mut R) -> String {
    let depth = rng.gen_range(1..=5);
    (0..depth).map(|_| *WORDS.choose(rng).unwrap()).collect::<Vec<_>>().join("/")
}

/// A filter, sometimes derived from `topic` so that matches are common.
pub fn random_filter<R: Rng>(rng: &mut R, topic: &str) -> String {
    let mut levels: Vec<String> = if rng.gen_bool(0.6) {
        topic.split('/').map(str::to_string).collect()
    } else {
        let depth = rng.gen_range(1..=5);
        (0..depth).map(|_| WORDS.choose(rng).unwrap().to_string()).collect()
    };
    for l in levels.iter_mut() {
        if rng.gen_bool(0.25) {
            *l = "+".into();
        }
    }
    if rng.gen_bool(0.3) {
        let cut = rng.gen_range(0..=levels.len());
        levels.truncate(cut);
        levels.push("#".into());
    } else if rng.gen_bool(0.2) {
        levels.push(WORDS.choose(rng).unwrap().to_string());
    }
    levels.join("/")
}
