#!/usr/bin/env python3
"""Writes mini_kg.tsv, category_map.json and queries.tsv for the test suite.

The graph is small and hand-curated: one taxonomy per semantic category plus
a handful of brand/product resources with subject links into it. Run from
this directory; output is deterministic.
"""

import json

ROOT = "kg:Category:"
RES = "kg:Resource:"

SEMANTIC = [
    "Bags", "Bakeries", "Clothing", "Coffee", "Consumer Electronics", "Cosmetics",
    "Decor", "Fashion", "Fashion Accessories", "Food Retail", "Footwear",
    "Home Appliances", "Jewellery", "Mobile Phones", "Restaurants", "Retail",
    "Sports", "Watches",
]

MALL_TO_SEMANTIC = {
    "Bakeries": "Bakeries", "Cafe": "Coffee", "Cosmetics": "Cosmetics",
    "Costume Jewellery": "Jewellery", "Delicatessen": "Food Retail",
    "Discount Cosmetics": "Cosmetics", "Fashion Accessories": "Fashion Accessories",
    "Fine Jewellery": "Jewellery", "General Footwear": "Footwear",
    "Gifts/Souvenirs": "Retail", "Groceries": "Food Retail", "Gymnasiums": "Sports",
    "Hair & Beauty": "Cosmetics", "Home Decor": "Decor", "Men's Fashion": "Clothing",
    "Mobile Phones & Accessories": "Mobile Phones",
    "Music/Videos/DVDs": "Consumer Electronics", "Newsagent/Stationery": "Retail",
    "Pad Sites": "Retail", "Repairs & Maintenance": "Retail", "Restaurant": "Restaurants",
    "Small/Major Appliances": "Home Appliances", "Sport": "Sports", "Takeaway": "Restaurants",
    "Travel": "Bags", "Unisex Fashion": "Fashion", "Watches": "Watches",
    "Women's Fashion": "Fashion", "Women's Footwear": "Footwear",
}


def cid(name):
    return ROOT + name.replace(" ", "_")


# category -> {child: parent}; parents not listed are the category root.
TAXONOMY = {
    "Bags": {
        "Luggage": None, "Handbags": None, "Backpacks": None, "Luggage brands": "Luggage",
        "Suitcases": "Luggage", "Travel gear": "Luggage", "Tote bags": "Handbags",
        "Clutch bags": "Handbags", "Satchels": "Handbags", "School bags": "Backpacks",
    },
    "Bakeries": {
        "Breads": None, "Pastries": None, "Bakery chains": None, "Doughnut shops": "Bakery chains",
        "Sourdough": "Breads", "Croissants": "Pastries", "Doughnuts": "Pastries", "Cakes": None,
    },
    "Clothing": {
        "Clothing brands": None, "Menswear": None, "Outerwear": None, "Tops": None,
        "Clothing brands of the United Kingdom": "Clothing brands",
        "Clothing brands of Italy": "Clothing brands", "Suits": "Menswear", "Shirts": "Menswear",
        "Jackets": "Outerwear", "Coats": "Outerwear", "Hoodies": "Tops", "T-shirts": "Tops",
    },
    "Coffee": {
        "Coffee drinks": None, "Coffeehouses": None, "Coffee preparation": None,
        "Coffeehouse chains": "Coffeehouses", "Espresso": "Coffee drinks", "Latte": "Coffee drinks",
        "Coffee beans": "Coffee preparation", "Coffee roasting": "Coffee preparation",
    },
    "Consumer Electronics": {
        "Computers": None, "Audio equipment": None, "Video game consoles": None,
        "Tablet computers": "Computers", "Laptops": "Computers", "Headphones": "Audio equipment",
        "Loudspeakers": "Audio equipment", "Home cinema": "Audio equipment",
        "Optical discs": None, "DVD": "Optical discs",
    },
    "Cosmetics": {
        "Makeup": None, "Cosmetics companies": None, "Skin care": None, "Hair care": None,
        "Eye makeup": "Makeup", "Lip makeup": "Makeup",
        "Cosmetics companies of South Korea": "Cosmetics companies",
        "Cosmetics companies of France": "Cosmetics companies", "Moisturizers": "Skin care",
        "Hair care products": "Hair care", "Hair styling products": "Hair care products",
    },
    "Decor": {
        "Interior design": None, "Home decor retailers": None, "Furnishings": None,
        "Cushions": "Furnishings", "Rugs": "Furnishings", "Lamps": "Furnishings",
        "Wall art": "Interior design", "Furniture retailers": "Home decor retailers",
    },
    "Fashion": {
        "Fashion retailers": None, "Fashion design": None, "Womenswear": None,
        "Fashion retailers of the United Kingdom": "Fashion retailers",
        "Fast fashion": "Fashion retailers", "Haute couture": "Fashion design",
        "Dresses": "Womenswear", "Skirts": "Womenswear",
    },
    "Fashion Accessories": {
        "Eyewear": None, "Belts": None, "Scarves": None, "Eyewear brands": "Eyewear",
        "Sunglasses": "Eyewear", "Hats": None, "Wallets": None,
    },
    "Food Retail": {
        "Supermarkets": None, "Delicatessens": None, "Greengrocers": None,
        "Supermarkets of Australia": "Supermarkets", "Cheeses": "Delicatessens",
        "Cured meats": "Delicatessens", "Organic food": "Greengrocers",
    },
    "Home Appliances": {
        "Kitchen appliances": None, "Cleaning appliances": None, "Home appliance brands": None,
        "Vacuum cleaner manufacturers": "Home appliance brands", "Vacuum cleaners": "Cleaning appliances",
        "Washing machines": "Cleaning appliances", "Refrigerators": "Kitchen appliances",
        "Microwave ovens": "Kitchen appliances", "Blenders": "Kitchen appliances",
    },
    "Jewellery": {
        "Jewellery companies": None, "Gemstones": None, "Jewellery types": None,
        "Bracelets": "Jewellery types", "Necklaces": "Jewellery types", "Rings": "Jewellery types",
        "Diamonds": "Gemstones", "Pearls": "Gemstones", "Costume jewellery": "Jewellery types",
    },
    "Mobile Phones": {
        "Mobile phones by manufacturer": None, "Smartphones": None, "Mobile phone accessories": None,
        "Nokia mobile phones": "Mobile phones by manufacturer",
        "Samsung mobile phones": "Mobile phones by manufacturer", "Windows Phone devices": "Smartphones",
        "Android devices": "Smartphones", "Phone cases": "Mobile phone accessories",
        "Chargers": "Mobile phone accessories",
    },
    "Restaurants": {
        "Restaurant chains": None, "Cuisine": None, "Fast food": None,
        "Chicken chains": "Restaurant chains", "Sushi": "Cuisine", "Pizza": "Cuisine",
        "Burgers": "Fast food", "Food courts": None,
    },
    "Retail": {
        "Department stores": None, "Newsagents": None, "Gift shops": None,
        "Department stores of Australia": "Department stores", "Stationery": "Newsagents",
        "Magazines": "Newsagents", "Souvenirs": "Gift shops", "Repair shops": None,
    },
    "Sports": {
        "Sportswear brands": None, "Sports equipment": None, "Gyms": None,
        "Running": "Sports equipment", "Tennis equipment": "Sports equipment",
        "Fitness": "Gyms", "Yoga": "Gyms", "Swimwear": None,
    },
    "Watches": {
        "Watch brands": None, "Watch types": None, "Watchmaking": None,
        "Luxury watch brands": "Watch brands", "Swiss watch brands": "Watch brands",
        "Diving watches": "Watch types", "Smartwatches": "Watch types",
        "Chronographs": "Watch types",
    },
}

# Footwear is built programmatically to the documented size of 94 terms.
FOOTWEAR_TYPES = ["Boots", "Shoes", "Sandals", "Sneakers", "Slippers", "Heels", "Flats", "Loafers"]
FOOTWEAR_MODIFIERS = ["Women's", "Men's", "Children's", "Leather", "Designer", "Casual", "Formal",
                      "Vintage", "Discount"]


def footwear():
    tax = {"Footwear brands": None, "Footwear retailers": None, "Shoemaking": None}
    for t in FOOTWEAR_TYPES:
        tax[t] = None
        for m in FOOTWEAR_MODIFIERS:
            tax[f"{m} {t.lower()}"] = t
    tax["Boot brands"] = "Footwear brands"
    tax["Shoe brands of Australia"] = "Footwear brands"
    tax["Shoe care"] = None
    tax["Shoe polish"] = "Shoe care"
    tax["Shoe horns"] = "Shoe care"
    tax["Insoles"] = "Shoe care"
    tax["Cobblers"] = "Shoemaking"
    # Depth 6 node: lies beyond lambda=5 and must not be counted.
    tax["Hand-stitched welts"] = "Cobblers"
    tax["Goodyear welt"] = "Hand-stitched welts"
    tax["Blake stitch"] = "Goodyear welt"
    tax["Welt trimming"] = "Blake stitch"
    return tax


TAXONOMY["Footwear"] = footwear()

# resource label -> (subject category labels)
RESOURCES = {
    "The Face Shop": ["Cosmetics companies of South Korea"],
    "Mascara": ["Eye makeup"],
    "Hair wax": ["Hair styling products"],
    "Superdry": ["Clothing brands of the United Kingdom"],
    "Emporio Armani": ["Clothing brands of Italy"],
    "Topshop": ["Fashion retailers of the United Kingdom"],
    "Ugg": ["Boot brands"],
    "Nokia Lumia": ["Nokia mobile phones", "Windows Phone devices"],
    "IKEA": ["Furniture retailers"],
    "Homeware": ["Furnishings"],
    "Rolex": ["Swiss watch brands", "Luxury watch brands"],
    "Samsonite": ["Luggage brands"],
    "Dyson": ["Vacuum cleaner manufacturers"],
    "Adidas": ["Sportswear brands"],
    "Starbucks": ["Coffeehouse chains"],
    "Pandora": ["Jewellery companies"],
    "Krispy Kreme": ["Doughnut shops"],
    "iPad": ["Tablet computers"],
    "Woolworths": ["Supermarkets of Australia"],
    "Nando's": ["Chicken chains"],
    "Ray-Ban": ["Eyewear brands"],
    "Kmart": ["Department stores of Australia"],
}

QUERIES = [
    ("the face shop clear mascara reviews", "Cosmetics"),
    ("Muk Hair Wax", "Cosmetics"),
    ("Superdry Sale", "Clothing"),
    ("Emporio Armani", "Clothing"),
    ("TopShop Sydney", "Fashion"),
    ("Ugg Shoes", "Footwear"),
    ("Nokia Lumia 520 reviews", "Mobile Phones"),
    ("ikea cushions", "Decor"),
    ("nest au homeware", "Decor"),
    ("rolex submariner price", "Watches"),
    ("samsonite carry on", "Bags"),
    ("dyson cordless", "Home Appliances"),
    ("adidas ultraboost", "Sports"),
    ("starbucks opening hours", "Coffee"),
    ("pandora charm bracelet", "Jewellery"),
    ("krispy kreme glazed", "Bakeries"),
    ("ipad air deals", "Consumer Electronics"),
    ("woolworths weekly specials", "Food Retail"),
    ("nando's menu", "Restaurants"),
    ("ray-ban aviator", "Fashion Accessories"),
    ("kmart catalogue", "Retail"),
]


def main():
    lines = ["# Mini knowledge graph: subject \\t predicate \\t object"]
    ids = {}
    for cat in SEMANTIC:
        root = cid(cat)
        lines.append(f"{root}\tlabel\t{cat}")
        ids[cat] = root
        for child, parent in TAXONOMY[cat].items():
            node = cid(child)
            assert child not in ids, child
            ids[child] = node
            lines.append(f"{node}\tbroader\t{ids[parent] if parent else root}")
            lines.append(f"{node}\tlabel\t{child}")
    for res, subjects in RESOURCES.items():
        rid = RES + res.replace(" ", "_")
        lines.append(f"{rid}\tlabel\t{res}")
        for s in subjects:
            lines.append(f"{rid}\tsubject\t{ids[s]}")

    # Footwear at depth <= 5: root + 4 + 8 types * (1 + 9 modifiers) + 2 brands + 3 care + 4 welt chain.
    depth = {"Footwear": 0}
    for child, parent in TAXONOMY["Footwear"].items():
        depth[child] = depth[parent if parent else "Footwear"] + 1
    within = sum(1 for d in depth.values() if d <= 5)
    assert within == 94, within

    with open("mini_kg.tsv", "w") as f:
        f.write("\n".join(lines) + "\n")
    with open("category_map.json", "w") as f:
        json.dump({"mall_to_semantic": MALL_TO_SEMANTIC,
                   "semantic_roots": {c: cid(c) for c in SEMANTIC}}, f, indent=2, sort_keys=True)
        f.write("\n")
    with open("queries.tsv", "w") as f:
        f.write("query\texpected_category\n")
        for q, c in QUERIES:
            f.write(f"{q}\t{c}\n")


if __name__ == "__main__":
    main()
