#!/usr/bin/env python3
"""Regenerates the bundled toy resources under data/.

Everything here is synthetic. The lexicon strengths are invented toy values on
the 1-9 moral-strength scale, not the published dictionary.
"""

import json
import random
from pathlib import Path

DATA = Path(__file__).resolve().parent.parent / "data"

LEXICON = [
    # harm_care
    ("care", "harm_care", 8.8), ("caring", "harm_care", 8.6),
    ("protect", "harm_care", 8.1), ("safe", "harm_care", 7.9),
    ("comfort", "harm_care", 7.7), ("kind", "harm_care", 8.3),
    ("hurt", "harm_care", 1.6), ("harm", "harm_care", 1.2),
    ("pain", "harm_care", 2.1), ("suffer", "harm_care", 1.8),
    ("kill", "harm_care", 1.0), ("cruel", "harm_care", 1.4),
    ("abuse", "harm_care", 1.1), ("help", "harm_care", 7.2),
    # cheating_fairness
    ("fair", "cheating_fairness", 8.5), ("justice", "cheating_fairness", 8.0),
    ("honest", "cheating_fairness", 8.2), ("equal", "cheating_fairness", 7.5),
    ("cheat", "cheating_fairness", 1.4), ("lie", "cheating_fairness", 2.0),
    ("unfair", "cheating_fairness", 1.9), ("steal", "cheating_fairness", 1.3),
    ("rights", "cheating_fairness", 7.1),
    # betrayal_loyalty
    ("loyal", "betrayal_loyalty", 8.7), ("family", "betrayal_loyalty", 7.6),
    ("friends", "betrayal_loyalty", 7.3), ("together", "betrayal_loyalty", 6.8),
    ("team", "betrayal_loyalty", 6.9), ("betray", "betrayal_loyalty", 1.3),
    ("abandoned", "betrayal_loyalty", 1.9), ("alone", "betrayal_loyalty", 3.1),
    ("traitor", "betrayal_loyalty", 1.2),
    # subversion_authority
    ("respect", "subversion_authority", 8.2), ("obey", "subversion_authority", 7.4),
    ("law", "subversion_authority", 7.0), ("parents", "subversion_authority", 6.6),
    ("boss", "subversion_authority", 5.9), ("rebel", "subversion_authority", 2.9),
    ("defy", "subversion_authority", 2.4), ("chaos", "subversion_authority", 2.2),
    # degradation_purity
    ("pure", "degradation_purity", 8.6), ("clean", "degradation_purity", 7.8),
    ("holy", "degradation_purity", 8.4), ("dirty", "degradation_purity", 2.2),
    ("disgust", "degradation_purity", 1.9), ("sin", "degradation_purity", 2.0),
    ("gross", "degradation_purity", 2.6), ("filthy", "degradation_purity", 1.5),
    # words listed under two dimensions
    ("trust", "betrayal_loyalty", 8.0), ("trust", "cheating_fairness", 7.4),
    ("worthless", "harm_care", 2.3), ("worthless", "degradation_purity", 3.0),
]

PROFANE = [
    "fuck", "fucking", "fucked", "f***ing", "f*cking", "f**k", "fck",
    "shit", "shitty", "sh*t", "s**t", "bullshit", "damn", "goddamn",
    "dammit", "bitch", "b*tch", "bastard", "asshole", "a**hole", "crap",
    "crappy", "dick", "piss", "pissed", "wtf", "motherfucker", "hell",
]

# clean words that share character n-grams with profanity
DECOYS = [
    "class", "assess", "scrap", "passion", "shift", "shirt", "fuchsia",
    "duck", "luck", "mitch", "pitch", "dickens", "hello", "damp", "dam",
    "bass", "craft", "shell", "pass", "assistant", "hitchhike",
]

SUBJECTS = ["i", "my friend", "the movie", "this day", "work", "the weather",
            "my roommate", "the game", "this class", "the bus", "my code",
            "the meeting", "dinner", "the party", "everything", "that song"]
VERBS = ["is", "was", "feels", "seems", "looks", "has been", "got"]
ADJS = ["awful", "great", "boring", "fine", "long", "strange", "nice",
        "terrible", "okay", "slow", "loud", "amazing", "weird", "sad", "cold"]
TAILS = ["today", "again", "honestly", "right now", "this week", "as usual",
         "for real", "lately", "tonight", "", "", ""]

# broad everyday vocabulary so that unseen clean text is not scored by the
# bias alone
COMMON = """
a about after again all also always am an and any are around as at away back
bad be because been before being best better big book bought bus but by call
came can car cat city coffee cold come could day did dinner do dog done down
drive each early eat end enough even evening every family far feel few find
first food for friend friends from fun game gave get give go going good got
great had happy hard has have he her here him his home hot house how i if in
into is it its job just keep kind know last late left let life like little
long look lot love made make many maybe me meet might mom more morning most
movie much music my need never new next nice night no not nothing now of off
old on once one only or other our out over park people phone picture place
plan play put rain read really right room said same saw school see she should
show since sleep slow so some something soon still store street study summer
sure take talk team tell than that the their them then there these they thing
think this time tired to today together told tomorrow too took town train
tried try two under until up us very visit wait walk want was watch water way
we week weekend well went were what when where which while who why will win
with without work world would write year yes yesterday yet you your
""".split()


def clean_sentence(rng):
    if rng.random() < 0.5:
        n = rng.randint(3, 14)
        parts = [rng.choice(COMMON) for _ in range(n)]
    else:
        parts = [rng.choice(SUBJECTS), rng.choice(VERBS), rng.choice(ADJS)]
        if rng.random() < 0.4:
            parts.append("and " + rng.choice(ADJS))
        tail = rng.choice(TAILS)
        if tail:
            parts.append(tail)
    if rng.random() < 0.35:
        parts.insert(rng.randint(0, len(parts)), rng.choice(DECOYS))
    s = " ".join(parts)
    return s + rng.choice([".", "!", "", "?"])


def profane_version(rng, clean):
    words = clean.rstrip(".!?").split(" ")
    words.insert(rng.randint(0, len(words)), rng.choice(PROFANE))
    if rng.random() < 0.25:
        words.insert(rng.randint(0, len(words)), rng.choice(PROFANE))
    return " ".join(words) + rng.choice([".", "!", "", "!!"])


def write_profanity(rng):
    rows = []
    for _ in range(600):
        clean = clean_sentence(rng)
        rows.append({"text": clean, "profane": False})
        rows.append({"text": profane_version(rng, clean), "profane": True})
    for w in PROFANE:
        rows.append({"text": w, "profane": True})
    for w in DECOYS:
        rows.append({"text": w, "profane": False})
    for a in ADJS:
        rows.append({"text": f"this is {a}", "profane": False})
    rng.shuffle(rows)
    with open(DATA / "profanity_corpus.jsonl", "w") as f:
        for r in rows:
            f.write(json.dumps(r) + "\n")


def write_lexicon():
    with open(DATA / "lexicon_toy.tsv", "w") as f:
        for word, dim, strength in LEXICON:
            f.write(f"{word}\t{dim}\t{strength}\n")


TOY_POSTS = [
    ("p01", "I feel so alone and worthless. Nobody would care if I disappeared.", "depressed"),
    ("p02", "Went hiking with friends today, the view from the top was amazing.", "control"),
    ("p03", "Everything hurts. I can't sleep and the pain won't stop, I'm so fucking tired.", "depressed"),
    ("p04", "Does anyone know a good recipe for banana bread? Mine always comes out dry.", "control"),
    ("p05", "My family thinks I'm lazy but I just can't get out of bed anymore.", "depressed"),
    ("p06", "The new update broke my build again, had to roll back the compiler.", "control"),
    ("p07", "I've been crying every night. I feel abandoned and I don't trust anyone.", "depressed"),
    ("p08", "Our team won the league final! Proud of everyone who showed up.", "control"),
    ("p09", "What's the point of anything. I hate myself and this shit life.", "depressed"),
    ("p10", "Just adopted a kitten, she is tiny and loves to sleep on my keyboard.", "control"),
    ("p11", "I tried to help but they said it was my fault. Maybe they are right.", "depressed"),
    ("p12", "Looking for book recommendations, I liked the last sci-fi series a lot.", "control"),
    ("p13", "Therapy is not working and I feel dirty and empty inside.", "depressed"),
    ("p14", "The law school admissions process is stressful but fair so far.", "control"),
    ("p15", "I keep thinking everyone would be better off without me. I'm so damn tired.", "depressed"),
    ("p16", "Fixed the bike chain myself, pretty happy with how clean it runs now.", "control"),
    ("p17", "My parents fight all the time and I just want to disappear.", "depressed"),
    ("p18", "Weekend plans: farmers market, then a long nap, then pizza with friends.", "control"),
    ("p19", "I feel like I betray everyone who tries to be kind to me.", "depressed"),
    ("p20", "Respect to the bus driver who waited for me this morning, made my day.", "control"),
]


def write_toy_posts():
    with open(DATA / "posts_toy.jsonl", "w") as f:
        for pid, text, label in TOY_POSTS:
            f.write(json.dumps({"id": pid, "text": text, "label": label}) + "\n")


def write_toy_users():
    users = [
        ("u1", "depressed", ["p01", "p03", "p05", "p09"]),
        ("u2", "control", ["p02", "p04", "p06"]),
        ("u3", "depressed", ["p07", "p11", "p13"]),
        ("u4", "control", ["p08", "p10", "p12", "p14"]),
        ("u5", "depressed", ["p15", "p17", "p19"]),
        ("u6", "control", ["p16", "p18", "p20"]),
    ]
    texts = {pid: text for pid, text, _ in TOY_POSTS}
    with open(DATA / "users_toy.jsonl", "w") as f:
        for uid, label, pids in users:
            posts = [{"text": texts[p], "ts": 1600000000 + 3600 * i}
                     for i, p in enumerate(pids)]
            f.write(json.dumps({"user_id": uid, "label": label, "posts": posts}) + "\n")


# Planted per-word VAD offsets; sentences contain exactly one emotive word
# and neutral fillers, targets = 3 + offsets.
EMOTIVE = {
    "joyful": (1.6, 0.9, 0.8), "delighted": (1.4, 0.7, 0.6),
    "grateful": (1.2, -0.2, 0.4), "calm": (0.8, -1.3, 0.5),
    "relaxed": (0.9, -1.1, 0.3), "proud": (1.1, 0.6, 1.2),
    "excited": (1.3, 1.5, 0.5), "hopeful": (0.9, 0.2, 0.3),
    "furious": (-1.5, 1.6, 0.9), "angry": (-1.2, 1.2, 0.6),
    "terrified": (-1.6, 1.5, -1.3), "scared": (-1.2, 1.0, -1.0),
    "miserable": (-1.7, -0.4, -1.1), "sad": (-1.3, -0.6, -0.8),
    "lonely": (-1.2, -0.8, -0.9), "bored": (-0.6, -1.4, -0.3),
    "tired": (-0.7, -1.2, -0.6), "nervous": (-0.8, 1.1, -0.9),
    "content": (1.0, -0.7, 0.6), "ashamed": (-1.3, 0.3, -1.4),
}
FILLERS = ["the", "today", "was", "i", "felt", "very", "after", "work",
           "at", "home", "with", "my", "dog", "morning", "evening", "we",
           "walked", "quite", "really", "so", "it", "seemed", "everyone"]


def write_vad(rng):
    words = sorted(EMOTIVE)
    with open(DATA / "vad_synthetic.jsonl", "w") as f:
        for _ in range(600):
            w = rng.choice(words)
            n = rng.randint(2, 7)
            toks = [rng.choice(FILLERS) for _ in range(n)]
            toks.insert(rng.randint(0, n), w)
            v, a, d = EMOTIVE[w]
            f.write(json.dumps({"text": " ".join(toks), "V": round(3 + v, 3),
                                "A": round(3 + a, 3), "D": round(3 + d, 3)}) + "\n")


def main():
    DATA.mkdir(exist_ok=True)
    write_profanity(random.Random(7))
    write_lexicon()
    write_toy_posts()
    write_toy_users()
    write_vad(random.Random(11))


if __name__ == "__main__":
    main()
