use echofit::pipeline::{parse_trace, sig6, trace_to_string, Condition, EchoTrace, Provenance, Sequence};
use echofit::units::TimeUnit;
use proptest::prelude::*;

fn trace_strategy() -> impl Strategy<Value = EchoTrace> {
    (
        prop::collection::vec((1e-6f64..1.0, 1e-9f64..10.0), 3..40),
        1e-3f64..300.0,
        0.0f64..8.0,
    )
        .prop_map(|(steps, t, b)| {
            let mut acc = 0.0;
            let (times_ms, intensity) = steps
                .into_iter()
                .map(|(dt, y)| {
                    acc += dt;
                    (acc, y)
                })
                .unzip();
            EchoTrace {
                sequence: Sequence::TwoPulse,
                times_ms,
                intensity,
                fixed_delay: None,
                condition: Condition::new(t, b),
                provenance: Provenance::Unknown,
            }
        })
}

proptest! {
    #[test]
    fn ms_trace_roundtrip_is_exact(trace in trace_strategy()) {
        let back = parse_trace(&trace_to_string(&trace, TimeUnit::Ms), "prop").unwrap();
        prop_assert_eq!(back.times_ms, trace.times_ms);
        prop_assert_eq!(back.intensity, trace.intensity);
        prop_assert_eq!(back.condition, trace.condition);
    }

    #[test]
    fn us_trace_roundtrip_is_close(trace in trace_strategy()) {
        let back = parse_trace(&trace_to_string(&trace, TimeUnit::Us), "prop").unwrap();
        for (a, b) in back.times_ms.iter().zip(&trace.times_ms) {
            prop_assert!((a - b).abs() <= 1e-14 * b.abs());
        }
    }

    #[test]
    fn sig6_keeps_six_digits(v in prop_oneof![-1e12f64..1e12, -1e-3f64..1e-3]) {
        let s = sig6(v);
        let back: f64 = s.parse().unwrap();
        if v == 0.0 {
            prop_assert_eq!(back, 0.0);
        } else {
            prop_assert!((back - v).abs() <= 5e-6 * v.abs(), "{} -> {}", v, s);
        }
    }
}
