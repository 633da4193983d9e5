#!/usr/bin/env python3
"""Regenerates desk.tsv, the labeled comment corpus the default model is trained on.

Each record is a code comment that references an issue. OnHold comments
describe work deferred until the referenced issue is resolved; CrossReference
comments mention an issue for context only. Phrasings follow the wording
developers use in practice (workarounds, disabled tests, pinned versions,
"see #N", "fixes #N", regression notes). The output is deterministic.

    python3 make_desk_corpus.py > desk.tsv
"""

import random

SEED = 20220517
rng = random.Random(SEED)

OWNERS = ["mockito/mockito", "square/okhttp", "google/guava", "apache/kafka", "spring-projects/spring-boot",
          "junit-team/junit5", "netty/netty", "elastic/elasticsearch", "jenkinsci/jenkins", "apache/commons-lang",
          "FasterXML/jackson-databind", "gradle/gradle", "quarkusio/quarkus", "eclipse/jetty.project"]


def ref():
    n = rng.randint(3, 24000)
    kind = rng.random()
    if kind < 0.35:
        return f"#{n}"
    if kind < 0.6:
        return f"https://github.com/{rng.choice(OWNERS)}/issues/{n}"
    if kind < 0.85:
        return f"{rng.choice(OWNERS)}#{n}"
    return f"issue {n}"


ONHOLD_PREFIX = ["TODO", "TODO:", "FIXME", "FIXME:", "HACK:", "XXX", "NOTE:", "Workaround:", "Temporary:", "", "",
                 "TODO(perf):", "TODO(cleanup):"]

ONHOLD_ACTION = [
    "remove this workaround", "revert this change", "drop this hack", "delete this copy of the method",
    "switch back to the stock implementation", "re-enable this test", "use the upstream API directly",
    "remove the retry loop", "go back to the default timeout", "simplify this block", "inline this helper",
    "remove the explicit cast", "un-ignore this test", "bump the dependency and delete the shim",
    "replace this reflection call", "get rid of the synchronized wrapper", "restore the original assertion",
    "migrate to the new builder", "remove the feature flag", "use the library's own parser",
    "Use this for now then modify this", "clean this up", "drop the fallback path", "delete this class",
    "re-add the null check", "stop pinning the version", "enable the strict mode again",
]

ONHOLD_WHEN = [
    "once {r} is fixed", "when {r} is fixed", "after {r} is resolved", "once {r} is resolved",
    "when {r} is resolved", "after {r} is merged", "once {r} gets merged", "when {r} lands",
    "once {r} is released", "as soon as {r} is closed", "when {r} is closed", "after {r} ships",
    "once upstream fixes {r}", "when upstream resolves {r}", "after {r} has been fixed",
    "once {r} is addressed", "when {r} gets fixed", "once {r} is done", "until {r} is fixed",
    "after the fix for {r} is released", "once the fix for {r} is available",
    "when a release containing {r} is out", "after {r} is resolved upstream",
]

ONHOLD_STANDALONE = [
    "Blocked by {r}; {a} afterwards.",
    "Waiting on {r}. {A} when it is resolved.",
    "Needed until {r} is fixed.",
    "Only necessary until {r} is resolved, then {a}.",
    "Temporary workaround for {r}; {a} once that is fixed.",
    "Disabled because of {r}. {A} when fixed.",
    "@Ignore until {r} is fixed",
    "Workaround for {r}. Can be removed once the issue is resolved.",
    "Keep this until {r} is closed, then {a}.",
    "Pinned because of {r}; unpin after it is released.",
    "Copied from upstream until {r} is merged. {A} afterwards.",
    "This is a stopgap for {r}; {a} when it gets resolved.",
    "Revisit after {r} is resolved.",
    "Depends on {r}. {A} as soon as it ships.",
    "Skipped pending {r}; {a} when it is fixed.",
    "Can go away once {r} is resolved",
    "Remove after {r} is fixed",
    "Do not touch until {r} is resolved",
    "{A} for 3.0, needs {r} first.",
    "Hardcoded for now. {r} tracks the proper fix; {a} then.",
    "Shim around {r}. {A} in the next major version if the issue is gone.",
    "Still broken upstream ({r}); {a} eventually.",
]

ONHOLD_REASON = [
    "", "", "", " The current release still throws on empty input.", " Otherwise the build breaks on Windows.",
    " The library ignores our timeout.", " This keeps CI green for now.", " Upstream returns the wrong charset.",
    " Needed for the Java 8 runtime.", " The mock cannot stub final methods yet.",
]

CROSS_TEMPLATES = [
    "See {r} for details.", "See {r}.", "See also {r}", "Fixes {r}.", "Fix for {r}: {d}.",
    "Regression test for {r}.", "Test case for {r}", "Reproduces {r}", "Added in {r}.", "Introduced by {r}.",
    "Related to {r}.", "Related: {r}", "As discussed in {r}, {d}.", "Implements the proposal from {r}.",
    "Ported from {r}.", "Follow-up to {r}: {d}.", "{R} was caused by {c}; {d} here.", "Originally reported in {r}.",
    "Background: {r}", "Design notes live in {r}.", "Behavior agreed on in {r}.", "Closes {r}.",
    "Covers the scenario from {r}.", "This mirrors the fix in {r}.", "Motivated by {r}.",
    "Context for this check: {r}", "Reported by a user in {r}; {d}.", "Fixed in {r}, keep the test to avoid regressions.",
    "The ordering here matters, see {r}.", "Bug {r}: {d}.", "Since {r} we {d}.", "Refs {r}",
    "Spec clarified in {r}; {d}.", "For the history of this flag see {r}.", "Benchmark numbers are in {r}.",
    "Users hit this in {r}, so {d}.", "Explained in {r}.", "Resolved {r} by {d}.", "Part of {r}.",
    "Thread safety was discussed in {r}.",
    "TODO: add more cases like the one in {r}.", "Once {r} was fixed upstream this path became the default.",
    "This was a workaround until {r} was resolved; it is now the supported API.",
    "Kept after {r} was resolved because callers depend on it.", "FIXME-free since {r} was merged.",
    "The retry loop exists because of {r}, which is a design decision, not a bug.",
    "When {r} is fixed in a client, the server still accepts the old format.",
    "Removed the workaround for {r} after it was released.", "Test stays disabled on purpose, see {r}.",
    "Until {r} the default was UTF-16; it is UTF-8 now.",
]

CROSS_DETAIL = [
    "handle null keys", "the cache must be cleared first", "we keep insertion order", "the timeout is in seconds",
    "empty strings are rejected", "close the stream in finally", "parse dates leniently", "escape the separator",
    "the listener runs on the caller thread", "retries are capped at three", "use UTF-8 explicitly",
    "the map is copied defensively", "negative sizes throw", "the header is case-insensitive",
    "sort before comparing", "never block the event loop", "validate the port range", "normalize line endings",
]

CROSS_CAUSE = ["a stale cache", "an off-by-one in the loop", "a race between listeners", "a missing flush",
               "the wrong default locale", "an unchecked cast", "integer overflow"]

CROSS_PREFIX = ["", "", "", "NOTE:", "Note:", "//", "Implementation note:", "Important:"]


def cap(s):
    return s[:1].upper() + s[1:] if s else s


def onhold():
    r = ref()
    a = rng.choice(ONHOLD_ACTION)
    if rng.random() < 0.6:
        text = f"{a} {rng.choice(ONHOLD_WHEN).format(r=r)}"
        prefix = rng.choice(ONHOLD_PREFIX)
        text = f"{prefix} {text}".strip() if prefix else cap(text)
        reason = rng.choice(ONHOLD_REASON)
        if reason:
            text += "." + reason
    else:
        text = rng.choice(ONHOLD_STANDALONE).format(r=r, a=a.lower() if not a[0].isupper() else a, A=cap(a))
        if rng.random() < 0.4:
            text = f"{rng.choice(['TODO', 'FIXME', 'HACK:', 'XXX'])} {text}"
    return text


def cross():
    r = ref()
    text = rng.choice(CROSS_TEMPLATES).format(r=r, R=cap(r), d=rng.choice(CROSS_DETAIL), c=rng.choice(CROSS_CAUSE))
    prefix = rng.choice(CROSS_PREFIX)
    if prefix and prefix != "//":
        text = f"{prefix} {text}"
    return text


def hard_cases():
    # Phrasings a keyword detector gets wrong in either direction.
    return [
        ("OnHold", "The parser is fine; the lexer hack below goes away once #412 is fixed."),
        ("OnHold", "Not pretty, but needed until square/okhttp#4212 is resolved."),
        ("OnHold", "Guava 31 breaks this (google/guava#5432); switch back when that is fixed."),
        ("OnHold", "Leave the sleep in place until https://github.com/netty/netty/issues/9941 is closed."),
        ("OnHold", "We duplicate the validation because of #77. Remove when it is fixed."),
        ("OnHold", "XXX: hardcoded until apache/kafka#1201 is merged upstream"),
        ("OnHold", "TODO re-enable on JDK 17 after #3301 is resolved"),
        ("OnHold", "Retry twice because of #918; drop the retry after the server fix is released."),
        ("OnHold", "Please remove after issue 18245 is resolved"),
        ("OnHold", "TODO: clean up after issue 52 is resolved"),
        ("OnHold", "FIXME after issue 733 is resolved the flag can go"),
        ("OnHold", "Use the slow path until #601 is fixed in the driver."),
        ("CrossReference", "Once #412 was fixed the lexer no longer needed a lookahead buffer."),
        ("CrossReference", "This used to be a workaround for #77; the real fix landed in 2.3."),
        ("CrossReference", "After #918 was resolved we simplified the retry policy to a single attempt."),
        ("CrossReference", "Fixed when square/okhttp#4212 was resolved; this test guards the behavior."),
        ("CrossReference", "The TODO that used to be here was handled in #3301."),
        ("CrossReference", "Removed the hack for #601 since the driver fix shipped."),
        ("CrossReference", "Issue 52 describes why the buffer is sized this way."),
        ("CrossReference", "TODO list for this module is tracked in #88."),
        ("CrossReference", "Workaround history: see apache/kafka#1201 and the linked discussion."),
        ("CrossReference", "Temporary files are cleaned up here because of #733."),
    ]


def escape(text):
    return text.replace("\\", "\\\\").replace("\t", "\\t").replace("\n", "\\n")


def main():
    records = [("OnHold", onhold()) for _ in range(150)] + [("CrossReference", cross()) for _ in range(150)]
    records += hard_cases()
    seen = set()
    unique = []
    for label, text in records:
        if text in seen:
            continue
        seen.add(text)
        unique.append((label, text))
    rng.shuffle(unique)
    print("# origin: desk corpus of issue-referencing code comments, generated by make_desk_corpus.py "
          f"(seed {SEED}) from hand-written phrasing templates; hard cases written by hand")
    print("# label\ttext")
    for label, text in unique:
        print(f"{label}\t{escape(text)}")


if __name__ == "__main__":
    main()
