#pragma once

// Random Spider-style SELECT statements for property tests.
//
// Structure decisions draw from one engine and identifier/literal choices from
// another, so two statements generated with the same structure seed differ
// only in names and values.

#include <random>
#include <string>
#include <vector>

namespace solidsql::test_support {

class Namer {
public:
    explicit Namer(std::uint32_t seed) : rng_(seed) {}

    std::string table() { return pick({"singer", "stadium", "album", "track", "employee", "dept", "city"}) + suffix(); }
    std::string column() { return pick({"name", "age", "title", "year", "price", "city_code", "rank"}) + suffix(); }
    std::string alias() { return "A" + std::to_string(rng_() % 1000); }
    std::string literal() {
        switch (rng_() % 4) {
            case 0: return std::to_string(rng_() % 5000);
            case 1: return std::to_string(rng_() % 100) + "." + std::to_string(rng_() % 100);
            case 2: return "'" + pick({"France", "Rock", "O''Brien", "x y z", ""}) + "'";
            default: return "\"" + pick({"USA", "Jazz", "2014-01-01"}) + "\"";
        }
    }

private:
    std::string pick(std::initializer_list<const char*> options) {
        const auto i = rng_() % options.size();
        return *(options.begin() + static_cast<std::ptrdiff_t>(i));
    }
    std::string suffix() { return rng_() % 2 ? "" : "_" + std::to_string(rng_() % 50); }

    std::mt19937 rng_;
};

class SqlGenerator {
public:
    SqlGenerator(std::uint32_t structure_seed, std::uint32_t naming_seed) : rng_(structure_seed), names_(naming_seed) {}

    std::string statement() {
        auto sql = query(0);
        if (chance(5)) sql += pick_op({" UNION ", " INTERSECT ", " EXCEPT ", " UNION ALL "}) + query(1);
        return sql;
    }

private:
    bool chance(unsigned one_in) { return rng_() % one_in == 0; }
    std::string pick_op(std::initializer_list<const char*> options) {
        return *(options.begin() + static_cast<std::ptrdiff_t>(rng_() % options.size()));
    }

    std::string column_ref(bool qualified, const std::string& alias) {
        return qualified ? alias + "." + names_.column() : names_.column();
    }

    std::string query(int depth) {
        const bool join = chance(3);
        const bool aliased = join || chance(4);
        const std::string a1 = aliased ? names_.alias() : "";
        const std::string a2 = join ? names_.alias() + "b" : "";
        auto col = [&] {
            if (!aliased) return names_.column();
            return (join && chance(2) ? a2 : a1) + "." + names_.column();
        };

        std::string sql = chance(6) ? "SELECT DISTINCT " : "SELECT ";
        const auto items = 1 + rng_() % 3;
        for (unsigned i = 0; i < items; ++i) {
            if (i > 0) sql += ", ";
            switch (rng_() % 5) {
                case 0: sql += pick_op({"count", "max", "min", "avg", "sum"}) + std::string("(") + col() + ")"; break;
                case 1: sql += "count(*)"; break;
                case 2: sql += col() + " AS " + names_.alias(); break;
                default: sql += col();
            }
        }
        sql += " FROM " + names_.table();
        if (aliased) sql += " AS " + a1;
        if (join) sql += " JOIN " + names_.table() + " AS " + a2 + " ON " + a1 + "." + names_.column() + " = " + a2 + "." +
                         names_.column();
        if (chance(2)) sql += " WHERE " + condition(depth, col);
        if (chance(3)) {
            sql += " GROUP BY " + col();
            if (chance(2)) sql += " HAVING count(*) " + pick_op({">", ">=", "="}) + " " + names_.literal();
        }
        if (chance(3)) {
            sql += " ORDER BY " + col();
            if (chance(2)) sql += pick_op({" DESC", " ASC"});
        }
        if (chance(4)) sql += " LIMIT " + std::to_string(1 + names_literal_int());
        return sql;
    }

    unsigned names_literal_int() { return static_cast<unsigned>(names_.literal().size()); }

    template <typename ColFn>
    std::string condition(int depth, ColFn& col) {
        switch (rng_() % (depth < 2 ? 7 : 5)) {
            case 0: return col() + " " + pick_op({"=", "!=", ">", "<", ">=", "<="}) + " " + names_.literal();
            case 1: return col() + " BETWEEN " + names_.literal() + " AND " + names_.literal();
            case 2: return col() + " LIKE " + names_.literal();
            case 3: return col() + " IS NOT NULL";
            case 4: return condition(depth + 1, col) + pick_op({" AND ", " OR "}) + condition(depth + 1, col);
            case 5: return col() + pick_op({" IN ", " NOT IN "}) + "(" + query(depth + 1) + ")";
            default: return col() + " > (" + query(depth + 1) + ")";
        }
    }

    std::mt19937 rng_;
    Namer names_;
};

}  // namespace solidsql::test_support
