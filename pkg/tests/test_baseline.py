"""Lexical baseline: feature extraction, the rule fallback on the two
documented URLs, and ensemble training."""

import pytest

from threatscope.baseline import (
    BaselineError,
    BaselineModel,
    extract_lexical_features,
    refang,
    rule_score,
    shipped_training_csv,
    SUSPICIOUS_SUBSTRINGS,
)

FAKE_MICROSOFT = "hxxps://sites.google.com/l0gin-microsoftwebonlne.app/8965767/"
REAL_GOOGLE = "https://accounts.google.com/ServiceLogin"


# ---------------------------------------------------------------------------
# Features
# ---------------------------------------------------------------------------


def test_refang():
    assert refang("hxxps://bad[.]example[.]com/x") == "https://bad.example.com/x"


def test_feature_extraction_basic():
    v = extract_lexical_features("https://a.b.example.com/path/to/page?q=1")
    assert v.url_length == len("https://a.b.example.com/path/to/page?q=1")
    assert v.dot_count == 3
    assert v.subdomain_depth == 2
    assert v.path_length == len("/path/to/page")
    assert v.digit_ratio == pytest.approx(1 / v.url_length)


def test_fake_microsoft_features():
    v = extract_lexical_features(FAKE_MICROSOFT)
    assert v.has_suspicious_substring  # l0gin
    assert v.path_length > 25
    assert v.hyphen_count >= 1


def test_digit_ratio_bounds():
    v = extract_lexical_features("https://1234.example/11111")
    assert 0.0 <= v.digit_ratio <= 1.0


# ---------------------------------------------------------------------------
# Rule fallback on the documented URLs
# ---------------------------------------------------------------------------


def test_fake_microsoft_classifies_malicious_by_rules():
    model = BaselineModel()  # untrained -> rule fallback
    assert model.classify_url(FAKE_MICROSOFT) == "malicious"


def test_real_google_login_classifies_benign_by_rules():
    model = BaselineModel()
    assert model.classify_url(REAL_GOOGLE) == "benign"


def test_rule_score_components():
    v = extract_lexical_features(FAKE_MICROSOFT)
    # leet substring (+2), deep path (+1), hyphens (+1)
    assert rule_score(FAKE_MICROSOFT, v, SUSPICIOUS_SUBSTRINGS) >= 4
    g = extract_lexical_features(REAL_GOOGLE)
    assert rule_score(REAL_GOOGLE, g, SUSPICIOUS_SUBSTRINGS) < 3


def test_untrained_without_fallback_errors():
    model = BaselineModel(rule_fallback=False)
    with pytest.raises(BaselineError):
        model.classify_url(REAL_GOOGLE)


# ---------------------------------------------------------------------------
# Trainable ensemble
# ---------------------------------------------------------------------------


def separable_toy_set():
    # planted rule: malicious iff the URL has three or more hyphens
    benign = [f"https://site{i}.example.com/page{i}" for i in range(10)]
    malicious = [f"http://a-b-c-d{i}.example-bad.top/x-y-z{i}" for i in range(10)]
    urls = benign + malicious
    labels = ["benign"] * 10 + ["malicious"] * 10
    vectors = [extract_lexical_features(u) for u in urls]
    return urls, vectors, labels


def test_ensemble_hits_100_percent_on_separable_set():
    urls, vectors, labels = separable_toy_set()
    model = BaselineModel(seed=7).fit(vectors, labels)
    predictions = [model.classify(v, url=u) for u, v in zip(urls, vectors)]
    assert predictions == labels  # oracle: the planted separating rule


def test_training_deterministic_with_seed():
    _, vectors, labels = separable_toy_set()
    a = BaselineModel(seed=3).fit(vectors, labels)
    b = BaselineModel(seed=3).fit(vectors, labels)
    probe = extract_lexical_features("http://x-y-z-w.example-bad.top/q")
    assert a.classify(probe) == b.classify(probe)


def test_shipped_training_csv_fits_clean():
    from threatscope.baseline import load_training_csv

    model = BaselineModel(seed=1).fit_csv(shipped_training_csv())
    assert model.trained
    # the shipped synthetic set is separable: training accuracy is 100%
    vectors, labels = load_training_csv(shipped_training_csv())
    assert [model.classify(v) for v in vectors] == labels
    assert model.classify_url("https://docs.example.com/reference/api") == "benign"
