import pytest

from mtkit.emoji_data import is_emoji
from mtkit.errors import DataError, ParseError
from mtkit.postprocess import (
    RULE_IDS,
    PostprocessConfig,
    apply_rules,
    parse_alignments,
    rule_trace,
)


def count_emoji(text):
    out = {}
    for c in text:
        if is_emoji(c):
            out[c] = out.get(c, 0) + 1
    return out


# (source, hypothesis, language, expected) — expected values hand-derived
# from the rule contracts; every case must also be a fixed point.
FIXTURES = [
    # r5: three dots become an ellipsis
    ("Dobrý den...", "Добрий день...", "uk", "Добрий день…"),
    ("No...", "Ну... так...", "uk", "Ну… так…"),
    ("Hm...", "Так......", "uk", "Так……"),
    # r3: capitalization
    ("STOP NOW", "зупиніться зараз", "uk", "ЗУПИНІТЬСЯ ЗАРАЗ"),
    ("Dobrý den.", "dobrý den.", "cs", "Dobrý den."),
    ("Ahoj.", "Ahoj.", "cs", "Ahoj."),
    ("ahoj.", "Ahoj.", "cs", "Ahoj."),
    ("2022 BYLO TĚŽKÉ", "2022 рік був важким", "uk", "2022 РІК БУВ ВАЖКИМ"),
    # r1: emoji transfer
    ("Dobrý den 🙂", "Добрий день", "cs", "Добрий день 🙂"),
    ("🙂 ahoj 🙂", "ahoj 🙂", "cs", "ahoj 🙂 🙂"),
    ("ahoj 🙂", "ahoj 🙂", "cs", "ahoj 🙂"),
    (
        "Jdeme 🎉 slavit dnes večer",
        "Йдемо святкувати сьогодні ввечері",
        "uk",
        "Йдемо 🎉 святкувати сьогодні ввечері",
    ),
    # r2: quotation marks
    ('Řekl "ano" hned.', 'Řekl "ano" hned.', "cs", "Řekl „ano“ hned."),
    ('Він сказав "так" і все.', 'Він сказав "так" і все.', "uk", "Він сказав «так» і все."),
    ('Cena "akce', 'Cena "akce', "cs", 'Cena "akce'),
    ('a "b" "c', 'a „b“ "c', "cs", 'a „b“ "c'),
    ('say "hi"', 'say "hi"', "other", 'say "hi"'),
    # r4: terminal punctuation
    ("Opravdu?", "Справді", "uk", "Справді?"),
    ("Stůj!", "Стій.", "uk", "Стій!"),
    ("Stůj!", "Стій…", "uk", "Стій!"),
    ("Bez konce", "Без кінця.", "uk", "Без кінця."),
    ("Počkej...", "Зачекай", "uk", "Зачекай."),
    ("Ano.", "", "cs", "."),
    # r6: bullets and enumeration
    ("- první bod", "první bod", "cs", "- první bod"),
    ("1. Zadání úkolu", "Zadání úkolu", "cs", "1. Zadání úkolu"),
    ("2) варіант", "варіант", "uk", "2) варіант"),
    ("• bod", "• bod", "cs", "• bod"),
    ("3. kapitola", "kapitola 3", "cs", "3. kapitola 3"),
    ("- POZOR VŠICHNI", "увага всі", "cs", "- УВАГА ВСІ"),
    # r7: repeated words
    ("cokoli", "a a b", "cs", "a b"),
    ("x", "слово слово слово тут", "uk", "слово тут"),
    ("x", "Že že ano", "other", "Že že ano"),
    ("x", "ano, ano znovu", "other", "ano, ano znovu"),
    # composites and no-ops
    ('KONEC "A" UŽ...', 'кінець "а" "а" вже', "uk", "КІНЕЦЬ «А» ВЖЕ."),
    ("Klid.", "Спокій.", "uk", "Спокій."),
]


def cfg_for(lang):
    return PostprocessConfig(target_language=lang)


class TestFixtureTable:
    @pytest.mark.parametrize("source,hyp,lang,expected", FIXTURES)
    def test_expected_output(self, source, hyp, lang, expected):
        assert apply_rules(source, hyp, cfg_for(lang)) == expected

    @pytest.mark.parametrize("source,hyp,lang,expected", FIXTURES)
    def test_idempotent(self, source, hyp, lang, expected):
        once = apply_rules(source, hyp, cfg_for(lang))
        assert apply_rules(source, once, cfg_for(lang)) == once

    @pytest.mark.parametrize("source,hyp,lang,expected", FIXTURES)
    def test_emoji_multiset_superset(self, source, hyp, lang, expected):
        out_counts = count_emoji(apply_rules(source, hyp, cfg_for(lang)))
        for char, count in count_emoji(source).items():
            assert out_counts.get(char, 0) >= count

    def test_table_covers_thirty_cases(self):
        assert len(FIXTURES) >= 30


class TestIndividualRules:
    def test_emoji_alignment_placement(self):
        cfg = PostprocessConfig(target_language="uk", alignment=((0, 1),))
        out = apply_rules("🚀 start now", "почати зараз", cfg)
        assert out == "почати зараз 🚀"

    def test_emoji_proportional_position(self):
        # offset 10 of 11 source chars -> char position 10.0 of an
        # 11-char hypothesis; boundaries {0, 6, 11} -> snapped to 11
        out = apply_rules("Dobrý den 🙂", "Добрий день", cfg_for("cs"))
        assert out == "Добрий день 🙂"

    def test_emoji_never_duplicated(self):
        out = apply_rules("ahoj 🙂", "ahoj 🙂 navíc", cfg_for("cs"))
        assert out.count("🙂") == 1

    def test_repeat_rule_preserves_inner_whitespace(self):
        cfg = PostprocessConfig(enabled_rules=frozenset({"r7"}))
        assert apply_rules("x", "a  a  b\tb", cfg) == "a  b"

    def test_repeat_rule_never_removes_single_occurrence(self):
        cfg = PostprocessConfig(enabled_rules=frozenset({"r7"}))
        for hyp in ("a", "a b c", "x y x"):
            out = apply_rules("s", hyp, cfg)
            assert set(out.split()) == set(hyp.split())
            assert len(out.split()) <= len(hyp.split())

    def test_quotes_pair_left_to_right(self):
        cfg = cfg_for("cs")
        assert apply_rules("x", '"a" "b"', cfg) == "„a“ „b“"

    def test_disabled_rules_are_identity(self):
        cfg = PostprocessConfig(target_language="cs", enabled_rules=frozenset())
        hyp = 'messy  "hyp" hyp...  '
        assert apply_rules("SOURCE!", hyp, cfg) == hyp

    def test_sources_never_modified(self):
        source = "Zdroj... 🙂"
        hyp = "Ціль"
        apply_rules(source, hyp, cfg_for("uk"))
        assert source == "Zdroj... 🙂"


class TestRuleTrace:
    def test_noop_input(self):
        trace = rule_trace("Klid.", "Спокій.", cfg_for("uk"))
        assert len(trace) == len(RULE_IDS)
        assert all(before == after for _, before, after in trace)

    def test_repeat_entry_visible(self):
        trace = rule_trace("x", "a a b", cfg_for("other"))
        by_rule = {rule: (before, after) for rule, before, after in trace}
        assert by_rule["r7"] == ("a a b", "a b")

    def test_composite_changes_exactly_four_rules(self):
        trace = rule_trace('KONEC "A" UŽ...', 'кінець "а" "а" вже', cfg_for("uk"))
        assert len(trace) == 7
        changed = [rule for rule, before, after in trace if before != after]
        assert changed == ["r2", "r3", "r4", "r7"]

    def test_final_state_matches_apply(self):
        for source, hyp, lang, _ in FIXTURES:
            trace = rule_trace(source, hyp, cfg_for(lang))
            assert trace[-1][2] == apply_rules(source, hyp, cfg_for(lang))


class TestConfig:
    def test_unknown_language(self):
        with pytest.raises(DataError):
            PostprocessConfig(target_language="de")

    def test_unknown_rule(self):
        with pytest.raises(DataError):
            PostprocessConfig(enabled_rules=frozenset({"r9"}))

    def test_parse_alignments(self):
        parsed = parse_alignments("0-0 1-2\n\n3-1\n")
        assert parsed == [((0, 0), (1, 2)), (), ((3, 1),)]
        with pytest.raises(ParseError):
            parse_alignments("0:0\n")


class TestEmojiData:
    def test_known_emoji(self):
        for char in "🙂🚀🎉©®™☀❤":
            assert is_emoji(char), char

    def test_non_emoji(self):
        for char in "aZ9.!?ž є «":
            assert not is_emoji(char), char
