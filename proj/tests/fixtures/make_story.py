#!/usr/bin/env python3
"""Builds the three-chunk story fixture and its expected rewrites.

Every pronoun in the story is annotated with the name it refers to, and each
pronoun's referent is the closest preceding name. The expected outputs follow
from the annotations alone:

  sliding      every annotated pronoun becomes its referent's name
  non_overlap  same, except pronouns in the second window that come before
               any name in that window stay as written (no antecedent there)

Window boundaries come from an independent re-statement of the token rule
(whitespace words, leading/trailing punctuation runs split off) and the greedy
whole-sentence fill with budget 512.
"""
import pathlib
import re

BUDGET = 512
HERE = pathlib.Path(__file__).resolve().parent

PEOPLE = [
    ("Alice", "she", "her"),
    ("Bruno", "he", "his"),
    ("Dr. Okafor", "she", "her"),
    ("Carla", "she", "her"),
    ("Tomas", "he", "his"),
    ("Greta", "she", "her"),
]

# {N} name, {P} subject pronoun, {Q} possessive pronoun.
GROUP = [
    "{N} walked to the old market before sunrise on a cold and windy morning.",
    "{P} bought flour, salt, honey and a basket of late pears from the stalls.",
    "After the long walk, {p} rested beside the fountain and counted the coins in {q} purse.",
    "{P} wrote a short list of errands on the back of a paper bag.",
    "Later {p} carried the heavy basket up the hill toward the bakery on the square.",
    "{P} stopped twice to catch {q} breath and to admire the view of the harbor.",
    "When the bells rang at noon, {p} finally reached the door of the bakery.",
    "{P} greeted the baker warmly and handed over the flour and the honey.",
    "The baker thanked {o} and promised fresh bread for the festival.",
    "{P} smiled, waved goodbye and walked home through the narrow streets.",
]

OBJECT = {"she": "her", "he": "him"}


def render(template, person, resolved):
    name, subj, poss = person
    out = template
    cap = lambda s: s[0].upper() + s[1:]
    out = out.replace("{N}", name)
    out = out.replace("{P}", name if resolved else cap(subj))
    out = out.replace("{p}", name if resolved else subj)
    out = out.replace("{q}", name if resolved else poss)
    out = out.replace("{o}", name if resolved else OBJECT[subj])
    return out


def count_tokens(text):
    n = 0
    for word in text.split():
        m = re.fullmatch(r"([!-/:-@\[-`{-~]*)(.*?)([!-/:-@\[-`{-~]*)", word)
        lead, core, trail = m.groups()
        if not core:
            n += 1
            continue
        n += (1 if lead else 0) + 1 + (1 if trail else 0)
    return n


def main():
    sentences = []  # (original, resolved, person index)
    for i, person in enumerate(PEOPLE):
        for t in GROUP:
            sentences.append((render(t, person, False), render(t, person, True), i, t))

    counts = [count_tokens(s[0]) for s in sentences]
    total = sum(counts)

    # Non-overlapping greedy windows.
    windows, start = [], 0
    while start < len(sentences):
        end, used = start, counts[start]
        while end + 1 < len(sentences) and used + counts[end + 1] <= BUDGET:
            end += 1
            used += counts[end]
        windows.append((start, end))
        start = end + 1
    assert len(windows) == 2, windows

    second = windows[1][0]
    sliding, non_overlap = [], []
    seen_name_in_window = False
    for idx, (orig, resolved, _, template) in enumerate(sentences):
        sliding.append(resolved)
        if idx >= second and not seen_name_in_window and "{N}" not in template:
            non_overlap.append(orig)
        else:
            non_overlap.append(resolved)
        if idx >= second and "{N}" in template:
            seen_name_in_window = True
    assert sliding != non_overlap, "window boundary falls on a name sentence"

    (HERE / "story.txt").write_text(" ".join(s[0] for s in sentences) + "\n")
    (HERE / "story.sliding.golden.txt").write_text(" ".join(sliding) + "\n")
    (HERE / "story.non_overlap.golden.txt").write_text(" ".join(non_overlap) + "\n")
    print(f"{len(sentences)} sentences, {total} tokens, windows {windows}")


if __name__ == "__main__":
    main()
