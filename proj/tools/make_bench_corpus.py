#!/usr/bin/env python3
# Copyright 2026 The GeoAgent Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Writes the synthetic search benchmark: catalog, annotated queries and the
scripted model replies for the simple and agentic tiers.

Every query plants one failure mode for single-pass translation:
  season      hemisphere-blind season mapping
  validation  the model product is retrieved instead of independent data
  drift       the place name resolves to the wrong box
  intent      the colloquial phrase is searched literally
"""

import argparse
import hashlib
import json
import pathlib
import random

INTROSPECT = "Stage: introspect"
TRANSLATE = "Stage: translate"
ZERO_SHOT = "Mode: zero-shot"
INFERENTIAL = "Mode: inferential"

# (category, mode, text, region, box, period, off_period, drift box, theme)
# theme: title stem, platform, params, required params, facets, literal phrase
QUERIES = [
    dict(cat=1, mode="season",
         text="CTD profiles from the Ross Sea during the austral summer of 2019/20",
         region="Ross Sea", box=(-78, -71, 165, 180),
         period=("2019-12-01", "2020-02-29"), off=("2019-06-01", "2019-08-31"),
         stem="CTD section", platforms=["RV Araon", "RV Italica", "RV Nathaniel B. Palmer"],
         params=["Pressure, water", "Temperature, water", "Salinity"],
         required=["Salinity", "Temperature"],
         facets=[("ctd", ["CTD", "conductivity temperature depth"])]),
    dict(cat=1, mode="validation",
         text="Independent measurements to validate HYCOM sea surface temperature in the Gulf of Mexico during 2018",
         region="Gulf of Mexico", box=(18, 30, -98, -81),
         period=("2018-01-01", "2018-12-31"), off=("2014-01-01", "2014-12-31"),
         stem="Sea surface temperature from moored buoy", platforms=["NDBC 42001", "NDBC 42002", "NDBC 42003"],
         params=["Temperature, water", "Wind speed"],
         required=["Temperature"],
         facets=[("sst", ["sea surface temperature", "SST"]), ("in_situ", ["buoy", "drifter", "in situ"])],
         model_stem="HYCOM sea surface temperature model output", model_word="HYCOM"),
    dict(cat=1, mode="drift",
         text="Zooplankton net hauls around South Georgia in 2016",
         region="South Georgia", box=(-56, -53, -39, -34),
         period=("2016-01-01", "2016-12-31"), off=("2009-01-01", "2009-12-31"),
         drift=(30, 35, -86, -80),
         stem="Zooplankton abundance from Bongo net hauls", platforms=["RRS James Clark Ross", "RV Polarstern", "RV Kaharoa"],
         params=["Copepoda abundance", "Euphausiacea abundance", "Salpidae abundance"],
         required=["Copepoda abundance"],
         facets=[("zooplankton", ["zooplankton", "mesozooplankton"])]),
    dict(cat=1, mode="intent",
         text="Where did the algal blooms happen off Namibia in spring 2017",
         region="northern Benguela", box=(-29, -17, 8, 16),
         period=("2017-09-01", "2017-11-30"), off=("2017-03-01", "2017-05-31"),
         stem="Chlorophyll a from water samples", platforms=["RV Meteor", "RV Mirabilis", "RV Africana"],
         params=["Chlorophyll a", "Phaeopigments", "Depth, water"],
         required=["Chlorophyll a"],
         facets=[("bloom", ["phytoplankton bloom"])], added=("bloom", "chlorophyll a"),
         literal="algal blooms"),

    dict(cat=2, mode="validation",
         text="Observations to check the ocean model salinity in the Bay of Bengal during 2015",
         region="Bay of Bengal", box=(5, 22, 80, 95),
         period=("2015-01-01", "2015-12-31"), off=("2011-01-01", "2011-12-31"),
         stem="Salinity profiles from Argo float", platforms=["Argo 2902110", "Argo 2902111", "Argo 2902112"],
         params=["Salinity", "Temperature, water", "Pressure, water"],
         required=["Salinity"],
         facets=[("salinity", ["salinity"]), ("in_situ", ["Argo", "float", "CTD"])],
         model_stem="Salinity ocean model reanalysis", model_word="model"),
    dict(cat=2, mode="drift",
         text="Benthic megafauna imagery from the Clarion Clipperton Zone in 2015",
         region="Clarion-Clipperton Zone", box=(5, 20, -160, -110),
         period=("2015-01-01", "2015-12-31"), off=("2008-01-01", "2008-12-31"),
         drift=(-10, 5, -30, -10),
         stem="Megafauna annotations from seafloor images", platforms=["AUV Abyss", "ROV Kiel 6000", "OFOS"],
         params=["Megafauna density", "Image area", "Depth, water"],
         required=["Megafauna density"],
         facets=[("megafauna", ["megafauna", "benthic fauna"])]),
    dict(cat=2, mode="intent",
         text="How fast is the Greenland ice melting into the fjords in summer 2019",
         region="Sermilik Fjord", box=(65, 67, -39, -36),
         period=("2019-06-01", "2019-08-31"), off=("2019-12-01", "2020-02-29"),
         stem="Glacial meltwater fraction from noble gas samples", platforms=["RV Adolf Jensen", "RV Dana", "Skiff survey"],
         params=["Meltwater fraction", "Helium", "Neon"],
         required=["Meltwater fraction"],
         facets=[("melt", ["ice melting"])], added=("melt", "meltwater"),
         literal="ice melting"),
    dict(cat=2, mode="season",
         text="Sea ice thickness measurements in the Weddell Sea in winter 2013",
         region="Weddell Sea", box=(-75, -60, -60, -20),
         period=("2013-06-01", "2013-08-31"), off=("2012-12-01", "2013-02-28"),
         stem="Sea ice thickness from drilling and electromagnetic sounding", platforms=["RV Polarstern", "Helicopter EM bird", "Ice station"],
         params=["Sea ice thickness", "Snow thickness", "Freeboard"],
         required=["Sea ice thickness"],
         facets=[("ice_thickness", ["sea ice thickness", "ice thickness"])]),

    dict(cat=3, mode="drift",
         text="Surface water pCO2 in the Gulf of Guinea between 2010 and 2012",
         region="Gulf of Guinea", box=(-5, 6, -5, 10),
         period=("2010-01-01", "2012-12-31"), off=("2004-01-01", "2005-12-31"),
         drift=(20, 30, 32, 44),
         stem="Surface water pCO2 underway measurements", platforms=["RV Meteor", "MV Monte Olivia", "RV Maria S. Merian"],
         params=["Partial pressure of carbon dioxide", "Temperature, water", "Salinity"],
         required=["Partial pressure of carbon dioxide"],
         facets=[("pco2", ["pCO2", "partial pressure of carbon dioxide"])]),
    dict(cat=3, mode="intent",
         text="Where was the water too low in oxygen off Peru in 2008",
         region="Peru upwelling", box=(-18, -3, -85, -70),
         period=("2008-01-01", "2008-12-31"), off=("2001-01-01", "2001-12-31"),
         stem="Dissolved oxygen profiles in the oxygen minimum zone", platforms=["RV Jose Olaya", "RV Meteor", "Glider IFM03"],
         params=["Oxygen, dissolved", "Temperature, water", "Depth, water"],
         required=["Oxygen, dissolved"],
         facets=[("hypoxia", ["low oxygen water"])], added=("hypoxia", "oxygen minimum zone"),
         literal="too low in oxygen"),
    dict(cat=3, mode="season",
         text="Nutrient samples from the Tasman Sea in summer 2012",
         region="Tasman Sea", box=(-45, -30, 150, 170),
         period=("2011-12-01", "2012-02-29"), off=("2012-06-01", "2012-08-31"),
         stem="Nutrient concentrations from rosette bottles", platforms=["RV Southern Surveyor", "RV Tangaroa", "RV Investigator"],
         params=["Nitrate", "Phosphate", "Silicate"],
         required=["Nitrate", "Phosphate"],
         facets=[("nutrients", ["nutrient", "nutrients"])]),
    dict(cat=3, mode="validation",
         text="In situ data to validate satellite chlorophyll in the Baltic Sea during 2014",
         region="Baltic Sea", box=(53, 66, 10, 30),
         period=("2014-01-01", "2014-12-31"), off=("2007-01-01", "2007-12-31"),
         stem="Chlorophyll a from ferrybox water samples", platforms=["FerryBox Finnmaid", "FerryBox Silja Serenade", "RV Elisabeth Mann Borgese"],
         params=["Chlorophyll a", "Temperature, water", "Salinity"],
         required=["Chlorophyll a"],
         facets=[("chlorophyll", ["chlorophyll"]), ("in_situ", ["ferrybox", "water samples", "in situ"])],
         model_stem="Chlorophyll satellite ocean colour product", model_word="satellite"),

    dict(cat=4, mode="intent",
         text="How acidic is the seawater near Svalbard in 2018",
         region="Svalbard", box=(76, 81, 5, 30),
         period=("2018-01-01", "2018-12-31"), off=("2011-01-01", "2011-12-31"),
         stem="Carbonate system pH and total alkalinity", platforms=["RV Helmer Hanssen", "RV Lance", "Kongsfjorden mooring"],
         params=["pH", "Alkalinity, total", "Carbon, inorganic, dissolved"],
         required=["pH"],
         facets=[("acidity", ["seawater acidity"])], added=("acidity", "carbonate system"),
         literal="acidic seawater"),
    dict(cat=4, mode="season",
         text="Bottom water temperature on the Patagonian shelf during summer 2017",
         region="Patagonian shelf", box=(-52, -38, -68, -56),
         period=("2016-12-01", "2017-02-28"), off=("2017-06-01", "2017-08-31"),
         stem="Bottom temperature from trawl-mounted loggers", platforms=["RV Puerto Deseado", "Fishing trawler logger", "RV Eduardo Holmberg"],
         params=["Temperature, water", "Depth, water", "Pressure, water"],
         required=["Temperature"],
         facets=[("bottom_temperature", ["bottom temperature", "bottom water temperature"])]),
    dict(cat=4, mode="validation",
         text="Measured wave heights to validate the WAVEWATCH hindcast in the North Sea during 2016",
         region="North Sea", box=(51, 61, -4, 9),
         period=("2016-01-01", "2016-12-31"), off=("2009-01-01", "2009-12-31"),
         stem="Significant wave height from wave buoy", platforms=["Wave buoy FINO1", "Wave buoy Ekofisk", "Wave buoy Helgoland"],
         params=["Significant wave height", "Wave period", "Wave direction"],
         required=["Significant wave height"],
         facets=[("wave_height", ["wave height", "significant wave height"]), ("in_situ", ["buoy", "in situ"])],
         model_stem="Significant wave height WAVEWATCH hindcast", model_word="WAVEWATCH"),
    dict(cat=4, mode="drift",
         text="Dissolved iron measurements around the Kerguelen Plateau in 2011",
         region="Kerguelen Plateau", box=(-53, -46, 66, 80),
         period=("2011-01-01", "2011-12-31"), off=("2005-01-01", "2005-12-31"),
         drift=(40, 50, 140, 150),
         stem="Dissolved iron from trace metal clean sampling", platforms=["RV Marion Dufresne", "RV Aurora Australis", "GO-FLO rosette"],
         params=["Iron, dissolved", "Manganese, dissolved", "Depth, water"],
         required=["Iron, dissolved"],
         facets=[("iron", ["dissolved iron", "iron"])]),

    dict(cat=5, mode="season",
         text="Seabird counts and sea surface temperature off the Antarctic Peninsula in summer 2015",
         region="Antarctic Peninsula", box=(-68, -60, -70, -55),
         period=("2014-12-01", "2015-02-28"), off=("2015-06-01", "2015-08-31"),
         stem="Seabird at-sea counts with sea surface temperature", platforms=["RV Laurence M. Gould", "RRS Ernest Shackleton", "RV Hespérides"],
         params=["Seabird count", "Temperature, water", "Wind speed"],
         required=["Seabird count", "Temperature"],
         facets=[("seabird", ["seabird", "seabirds"])]),
    dict(cat=5, mode="validation",
         text="Independent mooring data to validate the reanalysis currents in the Agulhas Current during 2013",
         region="Agulhas Current", box=(-40, -28, 20, 36),
         period=("2013-01-01", "2013-12-31"), off=("2006-01-01", "2006-12-31"),
         stem="Current velocity from ADCP mooring", platforms=["ACT mooring A", "ACT mooring B", "ACT mooring C"],
         params=["Current velocity, east-west", "Current velocity, north-south", "Depth, water"],
         required=["Current velocity"],
         facets=[("currents", ["current velocity", "currents"]), ("in_situ", ["ADCP", "mooring", "in situ"])],
         model_stem="Current velocity reanalysis model output", model_word="reanalysis"),
    dict(cat=5, mode="drift",
         text="Coral calcification and seawater carbonate chemistry in the Red Sea during 2012",
         region="Red Sea", box=(13, 28, 33, 43),
         period=("2012-01-01", "2012-12-31"), off=("2003-01-01", "2003-12-31"),
         drift=(40, 46, 27, 42),
         stem="Coral calcification rates with carbonate chemistry", platforms=["RV Thuwal", "Reef station Al Fahal", "Reef station Abu Shosha"],
         params=["Calcification rate", "Alkalinity, total", "pH"],
         required=["Calcification rate"],
         facets=[("calcification", ["calcification", "coral calcification"])]),
    dict(cat=5, mode="intent",
         text="Are the fish moving north because the sea off Portugal is getting warmer in 2019",
         region="Iberian margin", box=(36, 43, -12, -8),
         period=("2019-01-01", "2019-12-31"), off=("2010-01-01", "2010-12-31"),
         stem="Fish species distribution from bottom trawl survey with bottom temperature", platforms=["RV Noruega", "RV Mar Portugal", "RV Miguel Oliver"],
         params=["Fish abundance", "Temperature, water", "Species richness"],
         required=["Fish abundance", "Temperature"],
         facets=[("range_shift", ["fish moving north"])], added=("range_shift", "species distribution"),
         literal="fish moving north"),
]

CATEGORY_NAMES = {1: "entity", 2: "thematic", 3: "slicing", 4: "parameter", 5: "crossdomain"}


def record_id(key):
    return "ds-" + hashlib.sha1(key.encode()).hexdigest()[:8]


def geo(box, shrink=0.0):
    lat_min, lat_max, lon_min, lon_max = box
    return {"lat_min": lat_min + shrink, "lat_max": lat_max - shrink,
            "lon_min": lon_min + shrink, "lon_max": lon_max - shrink}


def span(period):
    return {"start": period[0], "end": period[1]}


def units(name):
    lower = name.lower()
    for key, unit in (("temperature", "degC"), ("salinity", "psu"), ("pressure", "dbar"),
                      ("depth", "m"), ("abundance", "#/m3"), ("chlorophyll", "mg/m3"),
                      ("thickness", "m"), ("height", "m"), ("velocity", "cm/s"),
                      ("iron", "nmol/kg"), ("oxygen", "umol/kg"), ("ph", "1")):
        if key in lower:
            return unit
    return "1"


def params(names):
    return [{"name": n, "unit": units(n)} for n in names]


def quarter(period, k):
    # k-th of three sub-ranges inside the period, by day count.
    from datetime import date, timedelta
    a = date.fromisoformat(period[0])
    b = date.fromisoformat(period[1])
    step = (b - a).days // 3
    s = a + timedelta(days=step * k)
    e = b if k == 2 else a + timedelta(days=step * (k + 1) - 1)
    return (s.isoformat(), e.isoformat())


def shift_years(day, years):
    from datetime import date
    d = date.fromisoformat(day)
    try:
        return d.replace(year=d.year + years).isoformat()
    except ValueError:  # 29 February
        return d.replace(year=d.year + years, day=28).isoformat()


def earlier_years(period, count):
    span_years = int(period[1][:4]) - int(period[0][:4]) + 1
    return [(shift_years(period[0], -(span_years + j + 1)), shift_years(period[1], -(span_years + j + 1)))
            for j in range(count)]


def build(q, n):
    qid = "q%02d" % n
    base = f"{qid}-{CATEGORY_NAMES[q['cat']]}"
    region = q["region"]
    records, relevant = [], []
    for k, platform in enumerate(q["platforms"]):
        rid = record_id(base + f"-rel-{k}")
        relevant.append(rid)
        records.append({
            "id": rid,
            "title": f"{q['stem']}, {region}, {platform}",
            "abstract": f"{q['stem']} collected by {platform} in the {region}.",
            "parameters": params(q["params"]),
            "platform": platform,
            "geo": geo(q["box"], 0.5),
            "time": span(quarter(q["period"], k)),
            "layout": "tabular",
            "size_bytes": 250000 + 1000 * k,
        })
    # Same region and theme, other season or year.
    records.append({
        "id": record_id(base + "-offseason"),
        "title": f"{q['stem']}, {region}, {q['platforms'][0]}",
        "abstract": f"{q['stem']} from an earlier campaign in the {region}.",
        "parameters": params(q["params"]),
        "platform": q["platforms"][0],
        "geo": geo(q["box"], 0.5),
        "time": span(q["off"]),
        "layout": "tabular",
        "size_bytes": 240000,
    })
    # Earlier years of the same programme.
    for j, (start, end) in enumerate(earlier_years(q["period"], 5)):
        platform = q["platforms"][j % len(q["platforms"])]
        records.append({
            "id": record_id(base + f"-archive-{j}"),
            "title": f"{q['stem']}, {region}, {platform}",
            "abstract": f"{q['stem']} collected by {platform} in the {region}.",
            "parameters": params(q["params"]),
            "platform": platform,
            "geo": geo(q["box"], 0.5),
            "time": span((start, end)),
            "layout": "tabular",
            "size_bytes": 200000 + 1000 * j,
        })
    drift = q.get("drift")
    if drift:
        records.append({
            "id": record_id(base + "-drift"),
            "title": f"{q['stem']}, {q['platforms'][1]}",
            "abstract": f"{q['stem']} from a regional survey.",
            "parameters": params(q["params"]),
            "platform": q["platforms"][1],
            "geo": geo(drift, 0.5),
            "time": span(q["period"]),
            "layout": "tabular",
            "size_bytes": 230000,
        })
    if q.get("model_stem"):
        records.append({
            "id": record_id(base + "-model"),
            "title": f"{q['model_stem']}, {region}",
            "abstract": f"Gridded {q['model_stem'].lower()} for the {region}.",
            "parameters": params(q["params"][:1]),
            "geo": geo(q["box"]),
            "time": span(q["period"]),
            "layout": "gridded",
            "size_bytes": 4_000_000_000,
        })
    # Keyword echoes with no usable content.
    echo = q["text"].rstrip("?")
    records.append({
        "id": record_id(base + "-echo-1"),
        "title": f"Outreach note: {echo}",
        "abstract": f"Press material answering the question '{echo}'.",
        "layout": "tabular",
        "size_bytes": 12000,
    })
    literal = q.get("literal", q["facets"][0][1][0])
    records.append({
        "id": record_id(base + "-echo-2"),
        "title": f"Photo gallery: {literal} in the {region}",
        "abstract": f"Images and captions on {literal} in the {region} for a public audience.",
        "layout": "tabular",
        "size_bytes": 90000,
    })

    query = {
        "id": qid,
        "text": q["text"],
        "category": q["cat"],
        "relevant_ids": sorted(relevant),
        "geo": geo(q["box"]),
        "time": span(q["period"]),
        "required_parameters": q["required"],
    }

    facets = [{"name": name, "synonyms": syns} for name, syns in q["facets"]]
    inferential = {
        "facets": facets,
        "geo": geo(q["box"]),
        "time": span(q["period"]),
        "required_parameters": q["required"],
        "derivation_notes": [f"{region} resolved to its bounding box",
                             f"period resolved to {q['period'][0]}..{q['period'][1]}"],
    }
    mode = q["mode"]
    if mode == "season":
        zero_shot = dict(inferential, time=span(q["off"]), derivation_notes=[])
    elif mode == "drift":
        zero_shot = dict(inferential, geo=geo(drift), derivation_notes=[])
    elif mode == "validation":
        zero_shot = {"facets": [facets[0], {"name": "model", "synonyms": [q["model_word"]]}],
                     "geo": geo(q["box"]), "time": span(q["period"])}
    else:
        zero_shot = {"facets": [{"name": "topic", "synonyms": [literal]}]}

    request = "Request: " + q["text"]
    rules = [
        {"contains": [TRANSLATE, ZERO_SHOT, request], "response": {"structured": zero_shot}},
        {"contains": [TRANSLATE, INFERENTIAL, request], "response": {"structured": inferential}},
    ]
    if mode == "intent":
        facet, synonym = q["added"]
        rules.append({"contains": [INTROSPECT, json.dumps(synonym)],
                      "response": {"structured": {"sufficient": True}}})
        rules.append({"contains": [INTROSPECT, json.dumps(q["facets"][0][1][0])],
                      "response": {"structured": {
                          "sufficient": False,
                          "missing": [f"records describing {literal}"],
                          "refinements": [{"op": "add_synonym", "facet": facet,
                                           "value": synonym}]}}})
    return records, query, rules


# Generic archive content sharing everyday query words. Kept clear of every
# facet term above so it only dilutes keyword matching.
BACKGROUND_REGIONS = [
    ("North Atlantic", (40, 60, -50, -10)), ("Labrador Sea", (53, 63, -64, -45)),
    ("Mediterranean Sea", (31, 45, -5, 36)), ("Arabian Sea", (5, 25, 55, 75)),
    ("South China Sea", (3, 23, 105, 121)), ("Coral Sea", (-25, -10, 145, 165)),
    ("Barents Sea", (70, 80, 20, 55)), ("Sargasso Sea", (20, 35, -70, -40)),
    ("Bering Sea", (52, 66, -180, -160)), ("Southern Ocean", (-65, -50, 0, 60)),
    ("Caribbean Sea", (9, 22, -88, -60)), ("Norwegian Sea", (62, 72, -5, 15)),
]
BACKGROUND_STEMS = [
    "Hydrographic measurements from the {r} during {s} {y}",
    "Surface water observations in the {r}, {s} {y}",
    "Water column sampling of the {r} in {y}",
    "Underway sea surface data from the {r} during {s} {y}",
    "Station data from the {r} collected in {s} {y}",
    "Summer field campaign in the {r}: water measurements {y}",
    "Winter cruise to the {r}: sea water observations {y}",
    "Spring survey of the {r}, water properties {y}",
]
BACKGROUND_PARAMS = ["Temperature, water", "Salinity", "Depth, water", "Pressure, water",
                     "Turbidity", "Conductivity", "Sound velocity in water"]
SEASONS = {"summer": ("06-01", "08-31"), "winter": ("12-01", "02-28"),
           "spring": ("03-01", "05-31"), "autumn": ("09-01", "11-30")}


def background(n=240, seed=2026):
    rng = random.Random(seed)
    out = []
    for i in range(n):
        name, box = BACKGROUND_REGIONS[i % len(BACKGROUND_REGIONS)]
        season = rng.choice(sorted(SEASONS))
        year = 2000 + rng.randrange(21)
        a, b = SEASONS[season]
        end_year = year + 1 if season == "winter" else year
        stem = rng.choice(BACKGROUND_STEMS).format(r=name, s=season, y=year)
        rec = {
            "id": record_id(f"background-{i}"),
            "title": stem,
            "abstract": f"Measurements in the {name} taken from the ship during the {season} of {year}.",
            "parameters": params(rng.sample(BACKGROUND_PARAMS, rng.randrange(0, 4))),
            "geo": geo(box, 0.5),
            "time": {"start": f"{year}-{a}", "end": f"{end_year}-{b}"},
            "layout": "tabular",
            "size_bytes": rng.randrange(10_000, 5_000_000),
        }
        if not rec["parameters"]:
            del rec["parameters"]
        out.append(rec)
    return out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent /
                                         "tests" / "fixtures" / "bench"))
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    records, queries, rules = [], [], []
    for n, q in enumerate(QUERIES, 1):
        r, query, qr = build(q, n)
        records += r
        queries.append(query)
        rules += qr
    records += background()
    rules.append({"contains": [INTROSPECT], "response": {"structured": {"sufficient": True}}})
    records.sort(key=lambda r: r["id"])
    with open(out / "catalog.jsonl", "w") as f:
        for r in records:
            f.write(json.dumps(r, ensure_ascii=False) + "\n")
    with open(out / "queries.jsonl", "w") as f:
        for q in queries:
            f.write(json.dumps(q, ensure_ascii=False) + "\n")
    with open(out / "script.json", "w") as f:
        json.dump(rules, f, indent=1, ensure_ascii=False)
        f.write("\n")


if __name__ == "__main__":
    main()
