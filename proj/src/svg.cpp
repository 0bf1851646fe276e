#include "etp/svg.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>
#include <vector>

namespace etp::svg {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kMargin = 50.0;

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) out.push_back(cell);
    return out;
}

bool parse_table(const std::string& csv, Table& t) {
    std::istringstream is(csv);
    std::string line;
    if (!std::getline(is, line)) return false;
    t.header = split(line);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != t.header.size()) return false;
        std::vector<double> row;
        for (const auto& c : cells) {
            double v = 0.0;
            const auto r = std::from_chars(c.data(), c.data() + c.size(), v);
            if (r.ec != std::errc{}) return false;
            row.push_back(v);
        }
        t.rows.push_back(std::move(row));
    }
    return !t.rows.empty();
}

std::string num(double v) {
    std::ostringstream os;
    os << std::setprecision(4) << v;
    return os.str();
}

void open(std::ostringstream& os, const std::string& title) {
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
       << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << "<text x=\"" << kWidth / 2 << "\" y=\"20\" text-anchor=\"middle\">" << title << "</text>\n";
}

void axes(std::ostringstream& os, const std::string& xl, const std::string& yl, double x0, double x1,
          double y0, double y1) {
    const double b = kHeight - kMargin;
    os << "<line x1=\"" << kMargin << "\" y1=\"" << b << "\" x2=\"" << kWidth - kMargin << "\" y2=\"" << b
       << "\" stroke=\"black\"/>\n"
       << "<line x1=\"" << kMargin << "\" y1=\"" << kMargin << "\" x2=\"" << kMargin << "\" y2=\"" << b
       << "\" stroke=\"black\"/>\n"
       << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 12 << "\" text-anchor=\"middle\">" << xl
       << "</text>\n"
       << "<text x=\"14\" y=\"" << kHeight / 2 << "\" transform=\"rotate(-90 14 " << kHeight / 2
       << ")\" text-anchor=\"middle\">" << yl << "</text>\n"
       << "<text x=\"" << kMargin << "\" y=\"" << b + 14 << "\" text-anchor=\"middle\">" << num(x0)
       << "</text>\n"
       << "<text x=\"" << kWidth - kMargin << "\" y=\"" << b + 14 << "\" text-anchor=\"middle\">" << num(x1)
       << "</text>\n"
       << "<text x=\"" << kMargin - 4 << "\" y=\"" << b << "\" text-anchor=\"end\">" << num(y0) << "</text>\n"
       << "<text x=\"" << kMargin - 4 << "\" y=\"" << kMargin + 4 << "\" text-anchor=\"end\">" << num(y1)
       << "</text>\n";
}

std::string bars(const Table& t, const std::string& title) {
    double x0 = t.rows.front()[0], x1 = x0, y1 = 0.0;
    for (const auto& r : t.rows) {
        x0 = std::min(x0, r[0]);
        x1 = std::max(x1, r[0]);
        y1 = std::max(y1, r[1]);
    }
    if (x1 == x0) x1 = x0 + 1.0;
    if (y1 <= 0.0) y1 = 1.0;
    const double plot_w = kWidth - 2 * kMargin;
    const double plot_h = kHeight - 2 * kMargin;
    const double bar_w = std::max(1.0, 0.8 * plot_w / static_cast<double>(t.rows.size()));
    std::ostringstream os;
    open(os, title);
    for (const auto& r : t.rows) {
        const double h = std::max(0.0, r[1]) / y1 * plot_h;
        const double x = kMargin + (r[0] - x0) / (x1 - x0) * (plot_w - bar_w);
        os << "<rect x=\"" << num(x) << "\" y=\"" << num(kHeight - kMargin - h) << "\" width=\"" << num(bar_w)
           << "\" height=\"" << num(h) << "\" fill=\"steelblue\"/>\n";
    }
    axes(os, t.header[0], t.header[1], x0, x1, 0.0, y1);
    os << "</svg>\n";
    return os.str();
}

std::string heatmap(const Table& t, const std::string& title) {
    std::map<double, int> xs, ys;
    double vmax = 0.0;
    for (const auto& r : t.rows) {
        xs.emplace(r[0], 0);
        ys.emplace(r[1], 0);
        vmax = std::max(vmax, r[2]);
    }
    int i = 0;
    for (auto& [x, idx] : xs) idx = i++;
    i = 0;
    for (auto& [y, idx] : ys) idx = i++;
    if (vmax <= 0.0) vmax = 1.0;
    const double cw = (kWidth - 2 * kMargin) / static_cast<double>(xs.size());
    const double ch = (kHeight - 2 * kMargin) / static_cast<double>(ys.size());
    std::ostringstream os;
    open(os, title + " (max " + num(vmax) + ")");
    for (const auto& r : t.rows) {
        const double s = std::clamp(r[2] / vmax, 0.0, 1.0);
        const int shade = static_cast<int>(std::lround(255.0 * (1.0 - s)));
        os << "<rect x=\"" << num(kMargin + xs[r[0]] * cw) << "\" y=\""
           << num(kHeight - kMargin - (ys[r[1]] + 1) * ch) << "\" width=\"" << num(cw) << "\" height=\""
           << num(ch) << "\" fill=\"rgb(" << shade << ',' << shade << ",255)\"/>\n";
    }
    axes(os, t.header[0], t.header[1], xs.begin()->first, xs.rbegin()->first, ys.begin()->first,
         ys.rbegin()->first);
    os << "</svg>\n";
    return os.str();
}

}  // namespace

std::string render_csv(const std::string& file_name, const std::string& csv) {
    Table t;
    if (!parse_table(csv, t)) return {};
    if (t.header.size() == 2) return bars(t, file_name);
    if (t.header.size() == 3 && file_name == "kd.csv") {
        Table b{{t.header[1], t.header[2]}, {}};
        for (const auto& r : t.rows) b.rows.push_back({r[1], r[2]});
        return bars(b, file_name);
    }
    if (t.header.size() == 3) return heatmap(t, file_name);
    return {};
}

}  // namespace etp::svg
