#!/usr/bin/env python3
"""Generate the fixture corpus under crates/core/tests/fixtures.

Deterministic: re-running produces byte-identical files. Writes

  corpus/<vertical>/<vertical>-<site>/<page_id>.htm
  corpus/groundtruth/<vertical>/<site>.json
  tasks/<vertical>-<site>.json        task files for `xpath-agent run`
  answers.json                        scripted model answers per site/field
  config.json                         replay-transport pipeline config
"""

import json
import os
import random

ROOT = os.path.join(os.path.dirname(__file__), "..", "crates", "core", "tests", "fixtures")
PAGES_PER_SITE = 8
LARGE_PAGES = {0, 1}  # page indices per site that get SWDE-scale boilerplate

ADJ = ["Silent", "Crimson", "Hidden", "Northern", "Broken", "Golden", "Last", "Distant",
       "Quiet", "Burning", "Hollow", "Paper", "Winter", "Iron", "Glass", "Lonely"]
NOUN = ["Harbor", "Orchard", "Cartographer", "Lantern", "Kingdom", "Archive", "River",
        "Garden", "Machine", "Letters", "Island", "Theory", "Compass", "Tide", "Meadow"]
FIRST = ["Ada", "Bruno", "Clara", "Dmitri", "Elena", "Farah", "Gustav", "Hana", "Ivo",
         "Julia", "Kenji", "Lena", "Marek", "Nadia", "Omar", "Priya"]
LAST = ["Okafor", "Lindqvist", "Moreau", "Tanaka", "Castillo", "Novak", "Brennan",
        "Haddad", "Kowalski", "Ferreira", "Adeyemi", "Sorensen"]
MAKERS = ["Canon", "Nikon", "Fujifilm", "Olympus", "Pentax", "Panasonic", "Leica"]
WORDS = ("lorem ipsum dolor sit amet consectetur adipiscing elit sed do eiusmod tempor "
         "incididunt ut labore et dolore magna aliqua enim ad minim veniam quis nostrud "
         "exercitation ullamco laboris nisi aliquip ex ea commodo consequat").split()

CATEGORIES = ["Fiction", "Mystery", "Science", "History", "Travel", "Poetry", "Children",
              "Cooking", "Art", "Business", "Comics", "Sports"]


def sentence(rng, n):
    return " ".join(rng.choice(WORDS) for _ in range(n)).capitalize() + "."


def price(rng, lo, hi):
    return "$%d.%02d" % (rng.randint(lo, hi), rng.choice([0, 49, 95, 99]))


def big_script(rng, kb):
    lines = []
    size = 0
    i = 0
    while size < kb * 1024:
        line = ("  window.__cfg_%d = {id: %d, key: \"%s\", on: %s, items: [%s]};\n"
                % (i, rng.randint(1, 99999), "".join(rng.choice("abcdef0123456789") for _ in range(24)),
                   rng.choice(["true", "false"]), ", ".join(str(rng.randint(0, 999)) for _ in range(12))))
        lines.append(line)
        size += len(line)
        i += 1
    return "(function(){\n" + "".join(lines) + "})();"


def big_style(rng, kb):
    rules = []
    size = 0
    i = 0
    while size < kb * 1024:
        rule = (".c%d-%s { margin: %dpx %dpx; padding: %dpx; color: #%06x; font-size: %dpx; }\n"
                % (i, rng.choice(["hd", "nav", "ft", "bx", "it"]), rng.randint(0, 40), rng.randint(0, 40),
                   rng.randint(0, 20), rng.randint(0, 0xFFFFFF), rng.randint(10, 24)))
        rules.append(rule)
        size += len(rule)
        i += 1
    return "".join(rules)


def head(rng, title, large, site):
    script_kb, style_kb = (36, 18) if large else (3, 2)
    return f"""<!DOCTYPE html>
<html lang="en">
<head>
<meta charset="utf-8">
<meta name="viewport" content="width=device-width, initial-scale=1">
<meta name="description" content="{title} at {site}">
<title>{title} | {site}</title>
<link rel="stylesheet" href="/static/{site}/main.css">
<link rel="icon" href="/favicon.ico">
<style>
{big_style(rng, style_kb)}</style>
<script>
{big_script(rng, script_kb)}
</script>
</head>
"""


def nav(rng, large):
    n = 40 if large else 12
    items = "\n".join(
        f'    <li class="nav-item nav-item--{i % 4}" data-track="nav-{i}"><a class="nav-link" href="/c/{i}" title="{CATEGORIES[i % len(CATEGORIES)]}">{CATEGORIES[i % len(CATEGORIES)]} {i}</a></li>'
        for i in range(n))
    return f"""<nav class="main-nav" role="navigation" aria-label="Main">
  <ul class="nav-list">
{items}
  </ul>
</nav>
"""


def footer(rng, large):
    cols = 6 if large else 3
    blocks = []
    for c in range(cols):
        links = "".join(
            f'<li><a href="/info/{c}/{k}" class="footer-link" rel="nofollow">{rng.choice(WORDS).capitalize()} {k}</a></li>'
            for k in range(8))
        blocks.append(f'  <div class="footer-col footer-col-{c}"><h4>{rng.choice(WORDS).capitalize()}</h4><ul>{links}</ul></div>')
    tracking = big_script(rng, 8 if large else 1)
    return ("<footer class=\"site-footer\" id=\"footer\">\n" + "\n".join(blocks) + "\n"
            + f'  <p class="legal">{sentence(rng, 20)}</p>\n</footer>\n'
            + f'<div class="cookie-modal" style="display:none" aria-hidden="true"><p>{sentence(rng, 30)}</p><button>Accept</button></div>\n'
            + f"<script>\n{tracking}\n</script>\n")


def hidden_junk(rng, large):
    n = 10 if large else 2
    return "".join(
        f'<div class="tpl" hidden><span class="tpl-{i}">{sentence(rng, 12)}</span></div>\n'
        + f'<template id="tpl-{i}"><div class="card"><p>{sentence(rng, 10)}</p></div></template>\n'
        + f'<noscript><img src="/px/{i}.gif" alt=""></noscript>\n'
        for i in range(n))


def related(rng, titles, large):
    n = 12 if large else 4
    cards = "\n".join(
        f'    <div class="rel-card" data-sku="{rng.randint(10000, 99999)}"><a href="/p/{rng.randint(1000, 9999)}" class="rel-link"><img src="/img/{k}.jpg" alt="" loading="lazy"><span class="rel-name">{rng.choice(titles)} Vol. {k + 2}</span></a><span class="rel-price">{price(rng, 3, 30)}</span></div>'
        for k in range(n))
    return f'  <aside class="related" id="related">\n    <h3>Customers also viewed</h3>\n{cards}\n  </aside>\n'


def reviews(rng, large):
    n = 6 if large else 2
    return "".join(
        f'    <div class="review" itemprop="review"><span class="stars" data-v="{rng.randint(1, 5)}">{"*" * rng.randint(1, 5)}</span><p class="review-text">{sentence(rng, 25)}</p><span class="reviewer">{rng.choice(FIRST)} {rng.choice(LAST)[0]}.</span></div>\n'
        for _ in range(n))


def book_title(rng, used):
    while True:
        t = f"The {rng.choice(ADJ)} {rng.choice(NOUN)}"
        if t not in used:
            used.add(t)
            return t


def authors(rng):
    names = []
    for _ in range(rng.choice([1, 1, 2, 3])):
        n = f"{rng.choice(FIRST)} {rng.choice(LAST)}"
        if n not in names:
            names.append(n)
    return names


def page_shelf(rng, i, large, used):
    title = book_title(rng, used)
    auth = authors(rng)
    p = price(rng, 8, 40)
    publisher = f"{rng.choice(LAST)} & Sons"
    isbn = "978-%d-%05d-%03d-%d" % (rng.randint(0, 9), rng.randint(0, 99999), rng.randint(0, 999), rng.randint(0, 9))
    author_items = "".join(f'<li class="author"><a href="/author/{a.replace(" ", "-").lower()}">{a}</a></li>' for a in auth)
    body = f"""<body class="site-shelf product-page" data-page="{i}">
<div id="top-banner" class="banner promo" data-track="banner">Free shipping on orders over $25</div>
{nav(rng, large)}<div id="content" class="wrap">
  <div class="breadcrumbs"><a href="/">Home</a> &gt; <a href="/books">Books</a> &gt; <span>{title}</span></div>
  <div class="product" itemscope itemtype="http://schema.org/Book">
    <h1 class="product-title" itemprop="name">{title}</h1>
    <div class="byline">by <ul class="authors">{author_items}</ul></div>
    <table class="details">
      <tr><th>Publisher:</th><td>{publisher}</td></tr>
      <tr><th>ISBN-13:</th><td>{isbn}</td></tr>
      <tr><th>Price:</th><td class="money">{p}</td></tr>
    </table>
    <div class="description" itemprop="description"><p>{sentence(rng, 40)}</p><p>{sentence(rng, 30)}</p></div>
    <div class="reviews">
{reviews(rng, large)}    </div>
  </div>
{related(rng, [title], large)}{hidden_junk(rng, large)}</div>
{footer(rng, large)}</body>
</html>
"""
    truth = {"title": [title], "author": auth, "price": [p]}
    return head(rng, title, large, "Shelf Books") + body, truth


def page_pagebarn(rng, i, large, used):
    title = book_title(rng, used)
    auth = authors(rng)
    p = price(rng, 8, 40)
    listp = price(rng, 41, 60)
    who = ", ".join(f'<span class="who">{a}</span>' for a in auth)
    body = f"""<body class="site-pagebarn">
<header class="hdr"><div class="logo"><a href="/">PageBarn</a></div><form class="search" action="/s"><input name="q" placeholder="Search"><button>Go</button></form></header>
{nav(rng, large)}<main>
  <div class="item-main">
    <div class="item-head"><h2>{title}</h2><span class="sub">{rng.choice(["Paperback", "Hardcover", "eBook"])}</span></div>
    <p class="credits">Written by {who}</p>
    <div class="buybox"><span class="lbl">Our price:</span> <span class="amt">{p}</span> <span class="lbl">List price:</span> <span class="amt">{listp}</span></div>
    <div class="blurb"><p>{sentence(rng, 35)}</p></div>
    <div class="reviews">
{reviews(rng, large)}    </div>
  </div>
{related(rng, [title], large)}{hidden_junk(rng, large)}</main>
{footer(rng, large)}</body>
</html>
"""
    truth = {"title": [title], "author": auth, "price": [p]}
    return head(rng, title, large, "PageBarn") + body, truth


def model_code(rng, used):
    while True:
        m = "%s-%d%s" % (rng.choice(["EOS", "Z", "X", "OM", "K", "GH", "Q"]), rng.randint(10, 99), rng.choice(["", "S", "R", " II", " Mark III"]))
        if m not in used:
            used.add(m)
            return m


def page_lensmart(rng, i, large, used):
    maker = rng.choice(MAKERS)
    model = model_code(rng, used)
    p = price(rng, 300, 2500)
    body = f"""<body class="site-lensmart">
<div class="topbar"><span>Call us: 555-0100</span></div>
{nav(rng, large)}<div id="main" class="container">
  <h1 class="cam-name">{maker} {model} Digital Camera</h1>
  <div class="gallery"><img src="/img/{i}/1.jpg" alt="front"><img src="/img/{i}/2.jpg" alt="back"></div>
  <div class="price-box">Price: <b>{p}</b> <em>in stock</em></div>
  <dl class="specs">
    <dt>Brand</dt><dd>{maker}</dd>
    <dt>Model</dt><dd>{model}</dd>
    <dt>Sensor</dt><dd>{rng.randint(12, 61)} MP</dd>
    <dt>Weight</dt><dd>{rng.randint(300, 900)} g</dd>
  </dl>
  <div class="reviews">
{reviews(rng, large)}  </div>
{related(rng, [maker], large)}{hidden_junk(rng, large)}</div>
{footer(rng, large)}</body>
</html>
"""
    truth = {"manufacturer": [maker], "model": [model], "price": [p]}
    return head(rng, f"{maker} {model}", large, "LensMart") + body, truth


def page_shuttr(rng, i, large, used):
    maker = rng.choice(MAKERS)
    model = model_code(rng, used)
    p = price(rng, 300, 2500)
    old = price(rng, 2600, 3000)
    body = f"""<body class="site-shuttr">
{nav(rng, large)}<div class="page">
  <div class="title-row"><h1 class="ttl">{maker} <span class="model-no">{model}</span></h1></div>
  <p class="cost">Price <s>{old}</s> {p} <small>incl. tax</small></p>
  <div class="spec-box">
    <div class="spec-line">Manufacturer: {maker}</div>
    <div class="spec-line">Mount: {rng.choice(["EF", "Z", "X", "MFT", "L"])}</div>
    <div class="spec-line">Battery: {rng.randint(300, 900)} shots</div>
  </div>
  <div class="reviews">
{reviews(rng, large)}  </div>
{related(rng, [maker], large)}{hidden_junk(rng, large)}</div>
{footer(rng, large)}</body>
</html>
"""
    truth = {"manufacturer": [maker], "model": [model], "price": [p]}
    return head(rng, f"{maker} {model}", large, "Shuttr") + body, truth


SITES = [
    ("book", "shelf", page_shelf),
    ("book", "pagebarn", page_pagebarn),
    ("camera", "lensmart", page_lensmart),
    ("camera", "shuttr", page_shuttr),
]

QUESTIONS = {
    "title": "What is the title of the book?",
    "author": "Who are the authors of the book?",
    "price": "What is the selling price?",
    "manufacturer": "Which company manufactures the camera?",
    "model": "What is the camera's model name?",
}

# Per site: cue text per field (empty when none) and the scripted model's
# xpath for each round; the last entry is the one that is correct.
ANSWERS = {
    "shelf": {
        "cues": {"title": "", "author": "by", "price": "Price:"},
        "rounds": {
            "title": ["//h1[@class='product-title']"],
            "author": ["//ul[@class='authors']/li/a/@href", "//ul[@class='authors']/li/a"],
            "price": ["//td", "//table[@class='details']//th[contains(., 'Price:')]/following-sibling::td[1]"],
        },
    },
    "pagebarn": {
        "cues": {"title": "", "author": "Written by", "price": "Our price:"},
        "rounds": {
            "title": ["//div[@class='item-head']/h2"],
            "author": ["//p[@class='credits']/span[@class='who']"],
            "price": ["//span[@class='amt']", "//span[@class='lbl' and contains(., 'Our price:')]/following-sibling::span[1]"],
        },
    },
    "lensmart": {
        "cues": {"manufacturer": "Brand", "model": "Model", "price": "Price:"},
        "rounds": {
            "manufacturer": ["//dt[contains(., 'Brand')]/following-sibling::dd[1]"],
            "model": ["//dt[contains(., 'Model')/following-sibling::dd[1]", "//dt[contains(., 'Model')]/following-sibling::dd[1]"],
            "price": ["//div[@class='price-box']/b"],
        },
    },
    "shuttr": {
        "cues": {"manufacturer": "Manufacturer:", "model": "", "price": "Price"},
        "rounds": {
            "manufacturer": ["substring-after(//div[@class='spec-line'][starts-with(., 'Manufacturer:')], 'Manufacturer: ')"],
            "model": ["//span[@class='model-no']"],
            "price": ["//p[@class='cost']/s", "//p[@class='cost']/text()[2]"],
        },
    },
}


def main():
    corpus = os.path.join(ROOT, "corpus")
    tasks_dir = os.path.join(ROOT, "tasks")
    os.makedirs(tasks_dir, exist_ok=True)
    for vertical, site, gen in SITES:
        rng = random.Random(f"{vertical}-{site}-7")
        used = set()
        page_dir = os.path.join(corpus, vertical, f"{vertical}-{site}")
        os.makedirs(page_dir, exist_ok=True)
        truth = {}
        for i in range(PAGES_PER_SITE):
            page_id = "%04d" % i
            html, t = gen(rng, i, i in LARGE_PAGES, used)
            with open(os.path.join(page_dir, page_id + ".htm"), "w", encoding="utf-8", newline="\n") as f:
                f.write(html)
            truth[page_id] = t
        gt_dir = os.path.join(corpus, "groundtruth", vertical)
        os.makedirs(gt_dir, exist_ok=True)
        with open(os.path.join(gt_dir, site + ".json"), "w", encoding="utf-8", newline="\n") as f:
            json.dump(truth, f, indent=2, sort_keys=True, ensure_ascii=False)
            f.write("\n")
        fields = list(next(iter(truth.values())).keys())
        task = {
            "task_id": f"{vertical}-{site}",
            "fields": [{"name": k, "question": QUESTIONS[k]} for k in fields],
            "pages": [f"../corpus/{vertical}/{vertical}-{site}/{pid}.htm" for pid in sorted(truth)],
            "truth": f"../corpus/groundtruth/{vertical}/{site}.json",
        }
        with open(os.path.join(tasks_dir, f"{vertical}-{site}.json"), "w", encoding="utf-8", newline="\n") as f:
            json.dump(task, f, indent=2)
            f.write("\n")
    with open(os.path.join(ROOT, "answers.json"), "w", encoding="utf-8", newline="\n") as f:
        json.dump(ANSWERS, f, indent=2, sort_keys=True)
        f.write("\n")
    config = {
        "ie": {"model_name": "fixture-small", "transport": {"kind": "replay", "directory": "replay"}},
        "program": {"model_name": "fixture-large", "transport": {"kind": "replay", "directory": "replay"}},
        "n_seeds": 3,
        "n_eval": 5,
        "rng_seed": 7,
    }
    with open(os.path.join(ROOT, "config.json"), "w", encoding="utf-8", newline="\n") as f:
        json.dump(config, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    main()
