"""Deterministic synthetic worlds: query log, KB files, corpus and gold labels.

Each class carries a few planted aspect families. A family has several
near-duplicate surface templates (``<E>`` is the entity, ``<P>`` the query
property) whose documents draw on one shared family vocabulary, so variants
of a family retrieve near-identical text while different families overlap
only through the entity name, a class domain vocabulary and generic filler
words. Noise follow-ups are real queries about entities of other classes.
The last entity of each class can be given zero popularity so it never
appears in the log.
"""

from __future__ import annotations

import json
import random
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .candidates import ENTITY_MARK, SegmentedQuery
from .evaluation import GoldClustering, write_gold
from .logmodel import QueryEvent, write_log
from .retrieval import Document, write_corpus

PROPERTY_MARK = "<P>"


@dataclass
class Family:
    name: str
    templates: list[str]
    weight: float = 1.0


@dataclass
class ClassSpec:
    name: str
    entities: list[str]
    families: list[Family]
    property: str | None = None


@dataclass
class WorldSpec:
    classes: list[ClassSpec]
    popularity: dict[str, float] = field(default_factory=dict)
    seed: int = 0
    session_count: int = 2000
    docs_per_aspect: int = 10
    general_docs: int = 40
    noise_per_entity: int = 2
    noise_rate: float = 0.1
    start_rate: float = 0.85
    family_vocab: int = 8
    family_words: int = 6
    variant_vocab: int = 2
    variant_words: int = 1
    domain_vocab: int = 6
    domain_words: int = 2
    filler_vocab: int = 80
    filler_words: int = 10
    redirects: list[tuple[str, str]] = field(default_factory=list)
    ambiguous: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not self.classes:
            raise ValueError("a world needs at least one class")
        for c in self.classes:
            if not c.entities or not c.families:
                raise ValueError(f"class {c.name!r} needs entities and families")
            for f in c.families:
                if f.weight <= 0:
                    raise ValueError(f"family {f.name!r} weight must be positive")
                if not f.templates or any(ENTITY_MARK not in t.split() for t in f.templates):
                    raise ValueError(f"family {f.name!r} templates must contain {ENTITY_MARK}")
        if any(w < 0 for w in self.popularity.values()):
            raise ValueError("popularity weights must be nonnegative")

    def weight_of(self, cls: ClassSpec, entity: str) -> float:
        if entity in self.popularity:
            return self.popularity[entity]
        return 1.0 / (cls.entities.index(entity) + 1)

    @classmethod
    def from_json(cls, obj: dict) -> "WorldSpec":
        obj = dict(obj)
        obj["classes"] = [
            ClassSpec(
                c["name"], list(c["entities"]),
                [Family(f["name"], list(f["templates"]), f.get("weight", 1.0)) for f in c["families"]],
                c.get("property"),
            )
            for c in obj["classes"]
        ]
        obj["redirects"] = [tuple(r) for r in obj.get("redirects", [])]
        return cls(**obj)

    def to_json(self) -> dict:
        return asdict(self)


def load_world_spec(path: str | Path) -> WorldSpec:
    return WorldSpec.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def expand(template: str, entity: str, prop: str | None) -> str:
    out = []
    for tok in template.split():
        if tok == ENTITY_MARK:
            out.append(entity)
        elif tok == PROPERTY_MARK:
            if prop:
                out.append(prop)
        else:
            out.append(tok)
    return " ".join(out)


def deal(rng: random.Random, vocab: list[str], k: int, n: int) -> list[list[str]]:
    """``n`` draws of ``k`` distinct words that use every word once before any repeats.

    Each draw is a uniform-looking sample, but together the draws cover the
    whole vocabulary whenever ``n * k >= len(vocab)``.
    """
    draws, pool = [], []
    for _ in range(n):
        if len(pool) < k:
            pool += [w for w in rng.sample(vocab, len(vocab)) if w not in pool]
        draws.append(pool[:k])
        pool = pool[k:]
    return draws


def _word(*parts) -> str:
    return "".join(str(p).replace(" ", "") for p in parts)


@dataclass
class PlantedQuery:
    query: SegmentedQuery
    class_name: str
    families: dict[str, list[str]]  # family -> instantiated surfaces
    noise: list[str]
    zero_log: bool


@dataclass
class World:
    spec: WorldSpec
    events: list[QueryEvent]
    documents: list[Document]
    labels: dict[str, tuple[str, str]]  # doc_id -> (entity, family or "general")
    planted: list[PlantedQuery]

    @property
    def queries(self) -> list[SegmentedQuery]:
        return [p.query for p in self.planted]

    def gold(self) -> list[GoldClustering]:
        out = []
        for p in self.planted:
            clusters = [tuple(v) for _, v in sorted(p.families.items())] + [(s,) for s in p.noise]
            out.append(GoldClustering(p.query.full, tuple(clusters)))
        return out

    def kb_rows(self):
        ents = [(e, c.name) for c in self.spec.classes for e in c.entities]
        return ents, list(self.spec.redirects), list(self.spec.ambiguous)


def build_world(spec: WorldSpec) -> World:
    rng = random.Random(spec.seed)
    fillers = [_word("common", i) for i in range(spec.filler_vocab)]

    planted = []
    docs: list[Document] = []
    labels: dict[str, tuple[str, str]] = {}

    def add_doc(head, words, entity, family):
        doc_id = f"d{len(docs):06d}"
        rng.shuffle(words)
        docs.append(Document(doc_id, head, " ".join(words)))
        labels[doc_id] = (entity, family)

    def background(domain):
        return rng.sample(domain, spec.domain_words) + rng.sample(fillers, spec.filler_words)

    for c in spec.classes:
        domain = [_word(c.name, "d", i) for i in range(spec.domain_vocab)]
        fam_vocab = {f.name: [_word(f.name, "w", i) for i in range(spec.family_vocab)] for f in c.families}
        for e in c.entities:
            q = SegmentedQuery.of(e, c.property)
            zero = spec.weight_of(c, e) <= 0
            fams = {f.name: [expand(t, e, c.property) for t in f.templates] for f in c.families}
            planted.append(PlantedQuery(q, c.name, fams, [], zero))

            ent_tokens = set(e.split())
            gen_vocab = [_word(e, "g", i) for i in range(spec.family_vocab)]
            for i in range(spec.general_docs):
                words = q.full.split() + rng.sample(gen_vocab, spec.family_words) + background(domain)
                add_doc(q.full, words, e, "general")
            for f in c.families:
                for j, surface in enumerate(fams[f.name]):
                    var_vocab = [_word(f.name, "v", j, "w", i) for i in range(spec.variant_vocab)]
                    n = spec.docs_per_aspect
                    hands = zip(
                        deal(rng, fam_vocab[f.name], spec.family_words, n),
                        deal(rng, var_vocab, spec.variant_words, n),
                        deal(rng, domain, spec.domain_words, n),
                    )
                    for fam_words, var_words, dom_words in hands:
                        words = (
                            [t for t in surface.split() if t not in ent_tokens]
                            + fam_words + var_words + dom_words
                            + rng.sample(fillers, spec.filler_words)
                        )
                        add_doc(surface, words, e, f.name)

    # off-topic follow-ups: real queries about some other class's entity
    for p in planted:
        if p.zero_log:
            continue
        pool = sorted(
            o.families[f][0]
            for o in planted
            if o.class_name != p.class_name and not o.zero_log
            for f in o.families
        )
        p.noise = sorted(rng.sample(pool, spec.noise_per_entity))

    events = _sessions(spec, planted, rng)
    return World(spec, events, docs, labels, planted)


def _sessions(spec: WorldSpec, planted: list[PlantedQuery], rng: random.Random) -> list[QueryEvent]:
    by_class = {c.name: c for c in spec.classes}
    live = [p for p in planted if not p.zero_log]
    weights = [spec.weight_of(by_class[p.class_name], p.query.entity) for p in live]
    sessions: list[list[str]] = []

    # every logged entity issues each planted surface at least once
    for p in live:
        for fam in by_class[p.class_name].families:
            for surface in p.families[fam.name]:
                sessions.append([p.query.full, surface])

    for _ in range(spec.session_count):
        p = rng.choices(live, weights)[0]
        fams = by_class[p.class_name].families
        seq = [p.query.full] if rng.random() < spec.start_rate else []
        for _ in range(rng.randint(1, 4)):
            if p.noise and rng.random() < spec.noise_rate:
                seq.append(rng.choice(p.noise))
                continue
            fam = rng.choices(fams, [f.weight for f in fams])[0]
            variants = p.families[fam.name]
            seq.append(variants[0] if rng.random() < 0.6 else rng.choice(variants))
        sessions.append(seq)

    events = []
    for i, seq in enumerate(sessions):
        user = f"u{i % 997:04d}"
        t0 = i * 7200
        for j, query in enumerate(seq):
            events.append(QueryEvent(user, t0 + 60 * j, query))
    return events


FILES = {
    "log": "log.tsv",
    "entities": "entities.tsv",
    "redirects": "redirects.tsv",
    "disambig": "disambig.txt",
    "corpus": "corpus.jsonl",
    "queries": "queries.tsv",
    "gold": "gold.jsonl",
    "labels": "labels.jsonl",
    "planted": "planted.jsonl",
    "spec": "world.json",
}


def write_world(world: World, outdir: str | Path) -> dict[str, Path]:
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {k: out / v for k, v in FILES.items()}
    write_log(world.events, paths["log"])
    ents, reds, amb = world.kb_rows()
    with open(paths["entities"], "w", encoding="utf-8", newline="\n") as fh:
        fh.writelines(f"{e}\t{c}\n" for e, c in ents)
    with open(paths["redirects"], "w", encoding="utf-8", newline="\n") as fh:
        fh.writelines(f"{a}\t{t}\n" for a, t in reds)
    with open(paths["disambig"], "w", encoding="utf-8", newline="\n") as fh:
        fh.writelines(f"{t}\n" for t in amb)
    write_corpus(world.documents, paths["corpus"])
    with open(paths["queries"], "w", encoding="utf-8", newline="\n") as fh:
        for p in world.planted:
            q = p.query
            fh.write(f"{q.full}\t{q.entity}" + (f"\t{q.property}" if q.property else "") + "\n")
    write_gold(world.gold(), paths["gold"])
    with open(paths["labels"], "w", encoding="utf-8", newline="\n") as fh:
        for doc_id, (e, fam) in world.labels.items():
            fh.write(json.dumps({"doc_id": doc_id, "entity": e, "family": fam}) + "\n")
    with open(paths["planted"], "w", encoding="utf-8", newline="\n") as fh:
        for p in world.planted:
            fh.write(json.dumps({
                "query": p.query.full, "entity": p.query.entity, "class": p.class_name,
                "families": p.families, "noise": p.noise, "zero_log": p.zero_log,
            }, sort_keys=True) + "\n")
    paths["spec"].write_text(json.dumps(world.spec.to_json(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return paths


def generate(spec: WorldSpec, outdir: str | Path) -> dict[str, Path]:
    return write_world(build_world(spec), outdir)


def _families(spec: list[tuple[str, list[str]]], prefix: str = "<E> <P>") -> list[Family]:
    return [Family(name, [f"{prefix} {s}" for s in suffixes]) for name, suffixes in spec]


def default_world(seed: int = 0, **overrides) -> WorldSpec:
    """Five 10-entity classes; the last entity of each class never appears in the log."""
    classes = [
        ClassSpec(
            "Country",
            ["vietnam", "thailand", "cambodia", "japan", "india", "peru", "kenya", "norway", "chile", "laos"],
            [Family("visa", ["<E> <P> visa", "<E> visa requirements"])] + _families([
                ("guide", ["guide", "guidebook"]),
                ("weather", ["weather", "weather forecast"]),
                ("packages", ["packages", "package tours"]),
                ("hotels", ["hotels", "hotel booking"]),
            ]),
            property="travel",
        ),
        ClassSpec(
            "NBA Player",
            ["kobe bryant", "yao ming", "lebron james", "tim duncan", "steve nash",
             "dirk nowitzki", "kevin garnett", "paul pierce", "ray allen", "shane battier"],
            _families([
                ("injury", ["injury", "injury report"]),
                ("pictures", ["pictures", "photos"]),
                ("salary", ["salary", "contract salary"]),
                ("shoes", ["shoes", "sneakers"]),
                ("stats", ["stats", "career stats"]),
            ]),
        ),
        ClassSpec(
            "University",
            ["yale university", "harvard university", "stanford university", "oxford university",
             "duke university", "brown university", "cornell university", "princeton university",
             "rice university", "tufts university"],
            _families([
                ("admissions", ["admissions", "admission requirements"]),
                ("tuition", ["tuition", "tuition fees"]),
                ("library", ["library", "libraries"]),
                ("athletics", ["athletics", "sports teams"]),
                ("jobs", ["jobs", "job openings"]),
            ]),
        ),
        ClassSpec(
            "Mountain",
            ["mount shasta", "mount rainier", "mount whitney", "mount fuji", "mount etna",
             "mount kenya", "mount elbrus", "mount cook", "mount olympus", "mount tam"],
            _families([
                ("climbing", ["climbing", "climbing routes"]),
                ("weather", ["weather", "weather forecast"]),
                ("camping", ["camping", "campgrounds"]),
                ("lodging", ["lodging", "cabins"]),
                ("map", ["map", "trail map"]),
            ]),
        ),
        ClassSpec(
            "Company",
            ["google", "microsoft", "intel", "adobe", "cisco", "netflix", "oracle", "nvidia", "ibm", "xerox"],
            _families([
                ("careers", ["careers", "career openings"]),
                ("stock", ["stock", "stock price"]),
                ("headquarters", ["headquarters", "head office"]),
                ("ceo", ["ceo", "chief executive"]),
                ("products", ["products", "product lineup"]),
            ]),
        ),
    ]
    popularity = {c.entities[-1]: 0.0 for c in classes}
    spec = WorldSpec(classes, popularity, seed=seed)
    for k, v in overrides.items():
        setattr(spec, k, v)
    return spec
