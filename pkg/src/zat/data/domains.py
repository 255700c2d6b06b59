"""Built-in domain library for the synthetic corpus.

Slots listed in ``SHARED_SLOTS`` recur across domains with identical
descriptions and value pools; everything else is private to one or two
domains. Templates use ``{slot_id}`` placeholders. Value tokens that contain
digits or symbols, and names in ``RARE_WORDS``, are left out of the bundled
word vectors so the character encoder has something to do.
"""

# Made-up place and store names share stems and differ only in their endings, so
# telling them apart from the word alone takes sub-word information.
NAME_STEMS = [
    "Ash", "Brook", "Clear", "Elm", "Fair", "Glen", "Hart", "Lake", "Maple", "Oak", "Pine",
    "River", "Stone", "Wester", "Silver", "Wood", "Marl", "Cres", "Dun", "Hollis",
]
CITY_ENDINGS = ["ville", "ton", "burg", "field", "dale"]
STORE_ENDINGS = ["mart", "ly", "co", "depot"]


def _names(endings, k):
    names = [stem + end for end in endings for stem in NAME_STEMS]
    return names[k::3]


GENERATED_CITIES = _names(CITY_ENDINGS, 0) + _names(CITY_ENDINGS, 1)
GENERATED_STORES = _names(STORE_ENDINGS, 1) + _names(STORE_ENDINGS, 2)

SHARED_SLOTS = {
    "date": "date",
    "time": "time",
    "location": "location city",
    "rating": "rating",
    "quantity": "quantity",
    "price": "price",
    "contact_name": "contact name",
}

VALUE_POOLS = {
    "date": [
        "today", "tomorrow", "monday", "tuesday", "wednesday", "thursday", "friday",
        "saturday", "sunday", "next week", "last week", "this weekend", "last night",
        "next friday", "last monday", "march 3rd", "december 24", "jan 15", "3/14", "10/02",
        "yesterday", "next month",
    ] + [f"{m}/{d}" for m in (1, 4, 6, 9, 11) for d in (2, 17, 28)],
    "time": [
        "7pm", "8:30", "noon", "midnight", "this morning", "this evening", "6 am", "9:15pm",
        "tonight", "early morning", "late afternoon", "11am", "around 5", "after lunch",
    ] + [f"{h}pm" for h in (1, 2, 3, 4, 5, 6, 9, 10)] + [f"{h}:{m}" for h in (7, 10, 12) for m in ("00", "45")],
    "location": [
        "Seattle", "Chicago", "Boston", "Denver", "New York", "San Francisco", "Austin",
        "Miami", "Los Angeles", "Portland", "Atlanta", "Dallas", "Phoenix", "Kirkland",
        "Redmond", "Tacoma", "San Diego", "Livonia", "Bellevue", "Spokane",
    ] + GENERATED_CITIES,
    "rating": [
        "best", "top rated", "five star", "highly rated", "4 star", "popular", "well reviewed",
        "3 star", "most popular", "top", "highest rated", "good",
    ],
    "quantity": [
        "two", "three", "four", "a dozen", "2", "5", "six", "a pair of", "ten", "12", "one",
        "several", "a few",
    ] + [str(n) for n in (3, 4, 6, 8, 10, 15, 20, 24, 30)],
    "price": [
        "$20", "under $50", "cheap", "less than 100 dollars", "affordable", "30 dollars",
        "inexpensive", "$15", "under 200 dollars", "budget", "$1200", "low cost", "$99",
    ] + [f"${n}" for n in (5, 8, 12, 25, 35, 40, 45, 60, 75, 80, 120, 150, 199, 250, 300, 450)]
      + [f"under ${n}" for n in (10, 30, 75, 100, 500)],
    "contact_name": [
        "Grace", "John", "Mary Smith", "Alex", "David", "Emma", "Mike", "Sarah Jones", "Priya",
        "Carlos", "Olivia", "Kenji", "Fatima", "Liam O'Neil", "Nora",
    ],
    "item": [
        "hats", "jeans", "jacket", "dress", "sneakers", "scarf", "boots", "shirt", "sweater",
        "sunglasses", "backpack", "watch", "winter coat", "running shoes", "leather belt",
    ],
    "color": [
        "black", "red", "blue", "navy", "white", "green", "beige", "black and tan", "dark grey",
        "pink", "olive",
    ],
    "category": [
        "restaurants", "electronics", "groceries", "spa", "mexican", "pizza", "toys", "books",
        "furniture", "sushi", "coffee", "hotels", "car rentals", "home decor",
    ],
    "store": [
        "Target", "Walmart", "Costco", "Macy's", "Best Buy", "Home Depot", "Safeway", "Nordstrom",
        "Kroger", "Ikea",
    ] + GENERATED_STORES,
    "airline": [
        "Delta", "United", "Alaska Airlines", "Southwest", "JetBlue", "American Airlines",
        "Lufthansa", "Emirates",
    ],
    "flight_number": [
        "UA 238", "DL1142", "AS 77", "flight 4410", "WN 902", "B6 15", "AA2301", "LH 491",
    ],
    "payment_method": [
        "credit card", "paypal", "gift card", "debit card", "cash", "store credit", "apple pay",
    ],
    "property_type": [
        "houses", "apartments", "condos", "townhomes", "studio", "lofts", "duplex",
        "single family homes", "cabins",
    ],
    "listing_type": [
        "for rent", "for sale", "for lease", "sublet", "foreclosure", "open house",
    ],
    "keyword": [
        "Christmas", "birthday", "anniversary", "graduation", "Halloween", "Mother's Day",
        "wedding", "back to school",
    ],
    "media_type": [
        "profile", "photos", "posts", "videos", "status", "stories", "albums", "comments",
    ],
    "team_name": [
        "Spurs", "Seahawks", "Lakers", "Yankees", "Red Sox", "Sounders", "Mariners", "Celtics",
        "Warriors", "49ers",
    ],
    "sport": ["basketball", "football", "baseball", "soccer", "hockey", "tennis", "golf"],
    "place_type": [
        "work", "home", "the airport", "downtown", "the gym", "school", "the mall", "the station",
    ],
    "transport_mode": ["bus", "train", "ferry", "subway", "light rail", "taxi", "bike", "car"],
    "accommodation_type": [
        "hotels", "hostels", "motels", "resorts", "cabins", "vacation rentals", "inns",
    ],
    "amenities": [
        "free wifi", "free kennel services", "a pool", "free parking", "breakfast", "a gym",
        "airport shuttle", "room service",
    ],
}

PRIVATE_DESCRIPTIONS = {
    "item": "item",
    "color": "color",
    "category": "category",
    "store": "store name",
    "airline": "airline",
    "flight_number": "flight number",
    "payment_method": "payment method",
    "property_type": "property type",
    "listing_type": "listing type",
    "keyword": "keyword occasion",
    "media_type": "media type",
    "team_name": "team name",
    "sport": "sport",
    "place_type": "place type",
    "transport_mode": "transport mode",
    "accommodation_type": "accommodation type",
    "amenities": "amenities",
}

DOMAINS = {
    "fashion": {
        "find_outfit": [
            "show me outfits with {item}",
            "show me {color} {item}",
            "find {rating} {item} under {price}",
            "i want {color} {item} for {price}",
            "can i wear {item} to a casual dinner",
            "look for {rating} {color} {item}",
            "are there any {item} in {color}",
            "search {item} that cost {price}",
        ],
        "style_advice": [
            "what goes well with {color} {item}",
            "does {color} match my {item}",
            "suggest {rating} {item} for me",
            "help me find my {color} {item}",
            "what should i wear with {item}",
            "recommend {item} that are {price}",
        ],
        "buy_outfit": [
            "buy {quantity} {item} in {color}",
            "order {quantity} {color} {item} please",
            "add {quantity} {item} to my cart",
            "get me {item} for {price}",
        ],
    },
    "flight_status": {
        "check_status": [
            "status of {location} flight that departed {date}",
            "is {airline} flight {flight_number} on time",
            "when does {flight_number} land in {location}",
            "check the status of my {airline} flight {date}",
            "did the {time} flight from {location} leave",
            "what is the status of {flight_number}",
            "is my flight to {location} delayed {date}",
            "has {airline} flight {flight_number} arrived",
        ],
        "arrival_time": [
            "when will the {airline} flight from {location} arrive",
            "what time does {flight_number} arrive {date}",
            "is the {time} flight to {location} landing on schedule",
            "tell me when flight {flight_number} gets to {location}",
            "will the {location} flight land before {time}",
        ],
        "gate_info": [
            "which gate is {airline} {flight_number} at",
            "where do i board {flight_number}",
            "gate for the {time} {airline} flight",
            "what gate does the {location} flight use {date}",
        ],
    },
    "deals": {
        "find_deals": [
            "find the {rating} deals for {category}",
            "find {category} deals in {location}",
            "show me {category} coupons under {price}",
            "any {rating} {category} deals {date}",
            "what are the {category} discounts at {store}",
            "find deals on {category} near {location}",
            "are there {rating} deals at {store} {date}",
            "show {category} offers for {price}",
            "deals at {store} near {location}",
            "any {category} deals at {location}",
            "{category} deals at {store} {date}",
            "show {rating} deals around {location} under {price}",
            "get me {category} coupons for {location}",
        ],
        "store_deals": [
            "what deals does {store} have {date}",
            "show me {store} coupons in {location}",
            "does {store} have sales on {category}",
            "find {rating} offers from {store}",
            "list {store} discounts under {price}",
            "what does {store} in {location} have on sale",
            "is {store} offering {category} deals {date}",
            "coupons at {store} for {price} or less",
        ],
        "expiring_deals": [
            "which {category} deals expire {date}",
            "show deals ending {date} in {location}",
            "are my {store} coupons still valid {date}",
            "remind me about {category} deals before {date}",
            "{store} deals ending {date} at {time}",
            "do {category} coupons at {location} expire {date}",
        ],
    },
    "purchase": {
        "return_item": [
            "return the {item} i purchased {date}",
            "i want to return {quantity} {item}",
            "how do i return my {item} from {date}",
            "start a return for the {item} i paid {price} for",
            "send back the {item} bought with {payment_method}",
        ],
        "order_status": [
            "where is the {item} i ordered {date}",
            "track my order of {quantity} {item}",
            "has my {item} shipped yet",
            "when will the {item} i bought {date} arrive",
            "did my {payment_method} order go through",
            "check the order for {quantity} {item}",
        ],
        "pay": [
            "pay {price} with {payment_method}",
            "use {payment_method} for the {item}",
            "buy {quantity} {item} with my {payment_method}",
            "charge {price} to {payment_method}",
            "send {price} to {contact_name}",
            "split the {price} bill with {contact_name}",
        ],
    },
    "real_estate": {
        "search_homes": [
            "show {property_type} {listing_type} on {location} street",
            "find {property_type} {listing_type} in {location}",
            "show me {quantity} bedroom {property_type} in {location}",
            "list {property_type} under {price} in {location}",
            "are there {property_type} {listing_type} near {location}",
            "search {rating} {property_type} for {price}",
            "i need {property_type} {listing_type} with {quantity} bathrooms",
        ],
        "price_check": [
            "how much are {property_type} in {location}",
            "what do {property_type} {listing_type} cost in {location}",
            "average price of {quantity} bedroom {property_type}",
            "is {price} a good price for {property_type}",
        ],
        "schedule_visit": [
            "schedule a visit to the {property_type} in {location} {date}",
            "book a tour of {property_type} {listing_type} {date} at {time}",
            "can i see the {location} {property_type} {date}",
        ],
    },
    "shopping": {
        "find_gifts": [
            "{category} for {keyword}",
            "find {keyword} gifts under {price}",
            "show me {rating} {category} for {keyword}",
            "gift ideas for {keyword} from {store}",
            "what {category} are good for {keyword}",
            "find {quantity} {category} gifts for {keyword}",
        ],
        "compare_prices": [
            "compare prices for {category} at {store}",
            "is {store} cheaper than {price} for {category}",
            "where can i get {rating} {category} for {price}",
            "find {category} under {price} near {location}",
        ],
        "shopping_list": [
            "add {quantity} {category} to my shopping list",
            "remind me to buy {category} {date}",
            "share my {keyword} shopping list with {contact_name}",
        ],
    },
    "social_network": {
        "view_profile": [
            "show {contact_name} 's {media_type}",
            "open {contact_name} 's {media_type} from {date}",
            "let me see the {media_type} {contact_name} shared {date}",
            "go to {contact_name} 's {media_type}",
            "show me {rating} {media_type} from {contact_name}",
        ],
        "post": [
            "post my {media_type} from {location}",
            "share these {media_type} with {contact_name}",
            "upload {quantity} {media_type} to my page",
            "tag {contact_name} in my {media_type} from {date}",
        ],
        "messages": [
            "message {contact_name} about {date}",
            "did {contact_name} comment on my {media_type}",
            "send {contact_name} a note at {time}",
        ],
    },
    "sports": {
        "schedule": [
            "find {team_name} game schedule",
            "when do the {team_name} play {date}",
            "what time is the {team_name} game {date}",
            "show {sport} games in {location} {date}",
            "is there a {sport} game at {time}",
            "when is the next {team_name} home game",
        ],
        "scores": [
            "what was the {team_name} score {date}",
            "did the {team_name} win {date}",
            "show me {sport} scores from {date}",
            "how did {team_name} do against the {team_name}",
        ],
        "tickets": [
            "buy {quantity} tickets for the {team_name} game",
            "find {team_name} tickets under {price}",
            "get {rating} seats for {sport} in {location}",
        ],
    },
    "transportation": {
        "traffic": [
            "what 's the traffic like to {place_type}",
            "how is traffic to {location} at {time}",
            "is there traffic on the way to {place_type}",
            "fastest route to {place_type} from {location}",
        ],
        "transit": [
            "when is the next {transport_mode} to {place_type}",
            "take the {transport_mode} to {location} at {time}",
            "how long does the {transport_mode} take to {place_type}",
            "find a {transport_mode} to {location} {date}",
            "is the {time} {transport_mode} to {place_type} running",
        ],
        "ride": [
            "book a {transport_mode} to {place_type} for {quantity} people",
            "get me a {transport_mode} under {price}",
            "call a {transport_mode} to {location} at {time}",
        ],
    },
    "travel": {
        "find_lodging": [
            "i need a list of {accommodation_type} that have {amenities}",
            "find {rating} {accommodation_type} in {location}",
            "show {accommodation_type} with {amenities} under {price}",
            "book {accommodation_type} in {location} for {date}",
            "are there {accommodation_type} near {location} with {amenities}",
            "find {accommodation_type} for {quantity} guests",
        ],
        "trip_planning": [
            "plan a trip to {location} {date}",
            "what is there to do in {location} {date}",
            "find {rating} {accommodation_type} for {price} a night",
            "how far is {location} from {location}",
        ],
        "booking": [
            "cancel my {accommodation_type} booking for {date}",
            "reserve {quantity} rooms at {rating} {accommodation_type}",
            "does the {accommodation_type} have {amenities}",
        ],
    },
}

# Names excluded from the word vectors even though they are purely alphabetic.
RARE_WORDS = set(GENERATED_CITIES) | set(GENERATED_STORES) | {
    "Kirkland", "Redmond", "Tacoma", "Livonia", "Spokane", "Priya", "Kenji", "Fatima", "Nora",
    "Carlos", "Kroger", "Ikea", "Lufthansa", "Emirates", "duplex", "lofts", "olive", "sublet",
}

NUMBER_WORDS = {"one", "two", "three", "four", "six", "ten", "dozen", "several", "few"}

POS_LEXICON = {
    "VERB": (
        "show find want wear look are search goes match suggest help should recommend buy order "
        "add get is does land check did leave delayed has arrived arrive will tell gets board use "
        "do have expire ending remind return purchased paid bought send track shipped ordered "
        "go pay charge split need see schedule book can cost compare share open let shared post "
        "upload tag message comment play win take run running call plan reserve cancel start "
        "list play was is 's landing departed"
    ).split(),
    "ADJ": (
        "casual next any valid good cheaper fastest good average long far home still much "
        "favorite my your"
    ).split(),
    "ADV": "when where how well yet on back before still please".split(),
    "NOUN": (
        "outfits dinner deals coupons discounts offers sales price prices flight gate bathrooms "
        "bedroom street visit tour gifts ideas list game games schedule score scores tickets "
        "seats traffic route way page note people guests rooms night booking trip return order "
        "cart bill status sale"
    ).split(),
}

VALUE_ADJ = set(
    "best top rated highly popular good cheap affordable inexpensive low budget black red blue "
    "navy white green beige tan dark grey pink olive free single next last this early late".split()
)
VALUE_ADV = {"well", "around", "after", "tonight", "today", "tomorrow", "yesterday"}
